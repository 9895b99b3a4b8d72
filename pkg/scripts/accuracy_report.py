"""Compare coefficient routes against a 50-digit solve of the optimality system.

Routes: the cancellation-free closed form (default), the same closed form
summed term by term, and the dense double-precision solve.

    python scripts/accuracy_report.py [--cases 2:10,3:10,3:20,4:20] [--points 7]
"""

import argparse
import os
import sys

import numpy as np

from w2interp.direct_system import solve_direct
from w2interp.explicit_coeffs import boundary_systems, coeffs_from_displays, operator_for, optimal_coefficients
from w2interp.grid import GridSpec

sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "tests"))
from oracles import mp_solve  # noqa: E402


def routes(grid, z):
    op = operator_for(grid.m, grid.N)
    termwise = coeffs_from_displays(op, grid, boundary_systems(op, grid, z, method="printed"), z).coeffs
    return {
        "closed form": optimal_coefficients(grid, z).coeffs,
        "term by term": termwise,
        "dense solve": solve_direct(grid, z).coeffs,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", default="2:10,3:10,3:20,4:20")
    ap.add_argument("--points", type=int, default=7)
    args = ap.parse_args()

    zs = np.linspace(0.03, 0.97, args.points)
    print(f"{'m':>2} {'N':>3} {'closed form':>12} {'term by term':>13} {'dense solve':>12}")
    for case in args.cases.split(","):
        m, N = (int(v) for v in case.split(":"))
        grid = GridSpec(m, N)
        worst = {}
        for z in zs:
            ref = mp_solve(m, N, float(z))[: N + 1]
            for name, c in routes(grid, float(z)).items():
                worst[name] = max(worst.get(name, 0.0), float(np.max(np.abs(c - ref))))
        print(f"{m:>2} {N:>3} {worst['closed form']:12.2e} {worst['term by term']:13.2e} {worst['dense solve']:12.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
