"""Deterministic compute times: closed branches, quadrature and simulation.

With constant compute times, local computing has mean age exactly
3/(2 mu_l). The partial scheme's remote queue is GI/D/1; when the edge
server is at least as fast as the source it never waits and the age has a
closed form, otherwise the age comes from nested quadrature over the M/D/1
waiting law. The two branches meet continuously at mu_s = mu_l.
"""

import time

from aoi_mec import Scheme, SchemeParams, SimConfig, TimeModel, simulate
from aoi_mec import deterministic as dt

DET = TimeModel.deterministic()


def main():
    print(f"local, mu_l = 1: {dt.aoi_local(1.0).mean} (exact 3/(2 mu_l))")

    p = SchemeParams(1.0, 1.0, 2.0)
    est = dt.aoi_partial(p)
    print(f"\npartial {(p.mu_l, p.mu_t, p.mu_s)}: {est.mean} "
          f"[{est.method.value}]  (zero-wait branch, exact 3.75)")
    r = simulate(SimConfig(Scheme.PARTIAL, p, time_model=DET,
                           n_messages=1_000_000, seed=0))
    print(f"simulated: {r.aoi.mean:.5f} +- {r.aoi.ci_halfwidth:.5f}")

    t0 = time.time()
    q = SchemeParams(2.0, 0.5, 1.0)
    est = dt.aoi_partial(q)
    print(f"\npartial {(q.mu_l, q.mu_t, q.mu_s)}: {est.mean:.9f} "
          f"[{est.method.value}] in {time.time() - t0:.2f}s (queueing branch)")

    print("\nbranch continuity at mu_s = mu_l:")
    for mu_s in (1.001, 1.0, 0.999):
        print(f"  mu_s = {mu_s}: {dt.aoi_partial(SchemeParams(1.0, 1.0, mu_s)).mean:.6f}")

    t0 = time.time()
    est = dt.aoi_remote(0.5, 1.0)
    print(f"\nremote (0.5, 1.0): {est.mean:.9f} [{est.method.value}] "
          f"in {time.time() - t0:.2f}s")


if __name__ == "__main__":
    main()
