"""Where offloading stops paying: age vs message size for two task weights.

Sweeps the update size l for a light task (c = 1000 Megacycles) and a heavy
one (c = 3500), prints the three schemes' analytic age at a few sizes, and
locates the size where the local and remote curves cross. Small updates
transmit quickly, so remote computing wins until the channel time catches up
with the local compute time.
"""

from aoi_mec import Scheme
from aoi_mec.sweep import find_crossover, load_preset, run_sweep

SHOW = (0.1, 0.5, 1.0, 2.0, 3.0)


def main():
    for preset in ("fig4_c1000", "fig4_c3500"):
        spec = load_preset(preset)
        rows = run_sweep(spec, seed=0)
        by_value = {}
        for r in rows:
            by_value.setdefault(round(r.var_value, 6), {})[r.scheme] = r
        print(f"\n{preset}: c = {spec.fixed['c']:g} Megacycles")
        print(f"{'l [Mbit]':>9} {'local':>9} {'remote':>9} {'partial':>9} {'alpha*':>7}")
        for v in sorted(by_value):
            if not any(abs(v - s) < 0.06 for s in SHOW):
                continue
            row = by_value[v]
            rem = row[Scheme.REMOTE]
            par = row[Scheme.PARTIAL]
            rem_txt = f"{rem.aoi:>9.4f}" if rem.stable else f"{'-':>9}"
            print(f"{v:>9.3f} {row[Scheme.LOCAL].aoi:>9.4f} {rem_txt} "
                  f"{par.aoi:>9.4f} {par.alpha:>7.3f}")
        cross = find_crossover(Scheme.LOCAL, Scheme.REMOTE, spec)
        print(f"local/remote cross at l = {cross.value:.4f} "
              f"(bracket [{cross.bracket[0]:.3f}, {cross.bracket[1]:.3f}])")


if __name__ == "__main__":
    main()
