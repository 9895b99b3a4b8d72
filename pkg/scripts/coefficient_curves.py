"""Tabulate C_b(z) for every node b over a z-grid (plot-ready CSV).

    python scripts/coefficient_curves.py --m 2 --n 5 [--zgrid 401] [--out curves.csv]
"""

import argparse
import csv
import sys

import numpy as np

from w2interp.grid import GridSpec
from w2interp.interpolator import coefficients


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--zgrid", type=int, default=401)
    ap.add_argument("--method", choices=("explicit", "direct", "corollary"), default="explicit")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    grid = GridSpec(args.m, args.n)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["z"] + [f"C{b}" for b in range(grid.N + 1)])
    for z in np.linspace(0.0, 1.0, args.zgrid):
        c = coefficients(grid, float(z), args.method).coeffs
        writer.writerow([repr(float(z))] + [repr(float(v)) for v in c])
    if fh is not sys.stdout:
        fh.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
