"""Optimal partition fraction across server load, exponential stages.

Reproduces the load sweep: base rates mu_s = 1 and mu_l in {0.1, 0.5}, the
transmit rate swept through rho_s = mu_t / mu_s. The optimized split is
never worse than the better pure scheme; with a slow channel it collapses
to local computing, with a fast server it approaches full offloading.
"""

import numpy as np

from aoi_mec import (
    Scheme,
    SchemeParams,
    TimeModel,
    analytic_aoi,
    check_stability,
    optimize_alpha_scaled,
)

EXP = TimeModel.exponential()


def main():
    for mu_l in (0.1, 0.5):
        print(f"\nmu_l = {mu_l}, mu_s = 1")
        print(f"{'rho_s':>6} {'local':>8} {'remote':>8} {'best age':>9} {'alpha*':>7}")
        for rho_s in np.linspace(0.05, 0.95, 10):
            base = SchemeParams(mu_l, float(rho_s), 1.0)
            best = optimize_alpha_scaled(base)
            local = analytic_aoi(Scheme.LOCAL, base, EXP).mean
            remote = (analytic_aoi(Scheme.REMOTE, base, EXP).mean
                      if check_stability(Scheme.REMOTE, base).stable else np.inf)
            print(f"{rho_s:>6.2f} {local:>8.3f} {remote:>8.3f} "
                  f"{best.aoi.mean:>9.4f} {best.alpha:>7.3f}")

    # profile form: a 1 Mbit update, 3500 Megacycles, 0.5 Mbit/s channel,
    # 1 GHz source against a 9 GHz edge server
    from aoi_mec import TaskProfile, optimize_alpha

    profile = TaskProfile(1.0, 3500.0, 0.5, 1.0, 9.0)
    best = optimize_alpha(profile)
    print(f"\ntask profile split: alpha* = {best.alpha:.4f}, "
          f"age = {best.aoi.mean:.4f}")


if __name__ == "__main__":
    main()
