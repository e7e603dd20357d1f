"""Radiated power of two emitters with and without collective emission.

Writes power_two_emitters_g1.csv (gamma = gamma_r) and power_two_emitters_g0.csv
(gamma = 0) with columns t_gr, power, baseline, addition. ``--plot`` also saves
a PNG next to each table.
"""
import argparse
from pathlib import Path

import numpy as np

from srkinetics.io import csv_text
from srkinetics.kinetics import power_decomposition
from srkinetics.model import RateSet


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--t-max", type=float, default=5.0)
    ap.add_argument("--points", type=int, default=501)
    ap.add_argument("--plot", action="store_true", help="also render PNGs (needs matplotlib)")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t = np.linspace(0, args.t_max, args.points)

    for tag, ratio in (("g1", 1.0), ("g0", 0.0)):
        p = power_decomposition(RateSet.from_ratio(ratio), t)
        rows = zip(t, p.power, p.baseline_power, p.addition)
        path = out / f"power_two_emitters_{tag}.csv"
        path.write_text(csv_text("power", ["t_gr", "power", "baseline", "addition"], rows,
                                 {"n": 2, "ratio": ratio}))
        crossings = np.count_nonzero(np.diff(np.sign(p.addition[1:])) != 0)
        print(f"{path}: ratio={ratio:g} crossings={crossings}")
        if args.plot:
            import matplotlib
            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
            fig, ax = plt.subplots(figsize=(4, 3))
            ax.plot(t, p.power, label="collective")
            ax.plot(t, p.baseline_power, "--", label="independent")
            ax.set_xlabel(r"$\gamma_r t$")
            ax.set_ylabel(r"$P/\gamma_r$")
            ax.legend()
            fig.tight_layout()
            fig.savefig(path.with_suffix(".png"), dpi=120)
            plt.close(fig)


if __name__ == "__main__":
    main()
