"""Relative quantum efficiency versus gamma/gamma_r for two and three emitters.

Writes rqe_n2.csv and rqe_n3.csv (columns ratio, Q, Q0, R) and prints the
refined maximum of each curve.
"""
import argparse
from pathlib import Path

import numpy as np

from srkinetics.io import csv_text, scan_table
from srkinetics.yields import maximize_rqe, scan_rqe


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out")
    ap.add_argument("--ratio-max", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=401)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    xs = np.linspace(0, args.ratio_max, args.points)

    curves = {}
    for n in (2, 3):
        cols, rows = scan_table(scan_rqe(n, xs))
        path = out / f"rqe_n{n}.csv"
        path.write_text(csv_text("scan", cols, rows, {"n": n}))
        curves[n] = np.array([r[3] for r in rows], dtype=float)
        opt = maximize_rqe(n)
        print(f"{path}: N={n} max R={opt.rqe:.6f} at ratio={opt.ratio:.5f}")

    if args.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(4, 3))
        for n, r in curves.items():
            ax.plot(xs, r, label=f"N={n}")
        ax.set_xlabel(r"$\gamma/\gamma_r$")
        ax.set_ylabel("R")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "rqe.png", dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main()
