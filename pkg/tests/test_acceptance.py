"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Also runnable directly: ``python tests/test_acceptance.py``.
"""

import time

import numpy as np

from w2interp.checks import (
    special_case_discrepancy,
    exactness_residual,
    kronecker_residual,
    m1_norm_agreement,
    min_norm_squared,
    monotone_violations,
    node_norm,
    optimality_margin,
    oracle_discrepancy,
    quadrature_residual,
)
from w2interp.cli import RunConfig, cmd_study
from w2interp.direct_system import solve_direct
from w2interp.discrete_operator import convolve, kernel_sequence, truncation_radius
from w2interp.explicit_coeffs import operator_for
from w2interp.grid import GridSpec
from w2interp.interpolator import coefficients

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = []

PAIRS = [(m, N) for m in (1, 2, 3) for N in (5, 10)]
SWEEP = np.linspace(0.0, 1.0, 101)


def report(k, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {k}: {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def criterion_1():
    start = time.perf_counter()
    worst = max(exactness_residual(m, N, SWEEP) for m, N in PAIRS)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    return report(1, "exactness", ok, f"max residual {worst:.2e} (tol 1e-9), {elapsed:.2f} s (limit 10 s)")


def criterion_2():
    worst = max(kronecker_residual(m, N) for m, N in PAIRS)
    return report(2, "Kronecker property", worst <= 1e-9, f"max |C_b(x_g) - delta| {worst:.2e} (tol 1e-9)")


def criterion_3():
    general = max(oracle_discrepancy(m, N, SWEEP) for m, N in PAIRS)
    special_direct = max(special_case_discrepancy(N, SWEEP, against="direct") for N in (5, 10))
    special_general = max(special_case_discrepancy(N, SWEEP, against="general") for N in (5, 10))
    ok = general <= 1e-8 and special_direct <= 1e-8 and special_general <= 1e-9
    detail = (
        f"closed form vs dense {general:.2e} (tol 1e-8), m=2 special case vs dense {special_direct:.2e} (tol 1e-8), "
        f"m=2 special case vs general {special_general:.2e} (tol 1e-9)"
    )
    return report(3, "oracle equivalence", ok, detail)


def _operator_residuals(m, N, betas):
    op = operator_for(m, N)
    h = op.h
    radius = truncation_radius(op)
    seqs = [lambda b: np.exp(h * np.asarray(b, dtype=float)), lambda b: np.exp(-h * np.asarray(b, dtype=float))]
    seqs += [lambda b, n=n: (h * np.asarray(b, dtype=float)) ** n for n in range(2 * m - 2)]
    G = kernel_sequence(m, h)
    ann = max(abs(convolve(op, f, b, radius)) for f in seqs for b in betas)
    conv = max(abs(convolve(op, G, b, radius)) for b in betas if b != 0)
    return ann, conv, abs(convolve(op, G, 0, radius) - 1.0)


def criterion_4():
    # gated on the grid indices 0..N; the wider window is reported for information only
    grid_res = [_operator_residuals(m, N, range(N + 1)) for m, N in PAIRS]
    ann, conv, center = (max(r[i] for r in grid_res) for i in range(3))
    wide = max(max(_operator_residuals(m, N, range(-N, 2 * N + 1))[:2]) for m, N in PAIRS)
    ok = ann <= 1e-8 and conv <= 1e-8 and center <= 1e-8
    detail = (
        f"null-space residual {ann:.2e}, D*G off-centre {conv:.2e}, |D*G(0) - 1| {center:.2e} (tol 1e-8); "
        f"beta in [-N, 2N] gives {wide:.2e} (not gated)"
    )
    return report(4, "discrete-operator identities", ok, detail)


def criterion_5():
    low = min(min_norm_squared(m, N, SWEEP) for m, N in PAIRS)
    agree = max(m1_norm_agreement(N, SWEEP) for N in (5, 10))
    nodes = max(node_norm(m, N) for m, N in PAIRS)
    ok = low >= -1e-12 and agree <= 1e-10 and nodes <= 1e-12
    detail = f"min norm^2 {low:.2e} (>= -1e-12), m=1 formulas {agree:.2e} (tol 1e-10), norm at nodes {nodes:.2e} (tol 1e-12)"
    return report(5, "norm consistency", ok, detail)


def criterion_6():
    worst = max(quadrature_residual(m, N) for m, N in PAIRS)
    return report(6, "quadrature reduction", worst <= 1e-8, f"max moment residual {worst:.2e} (tol 1e-8)")


def criterion_7():
    start = time.perf_counter()
    blocks, status = cmd_study(RunConfig("study"))
    elapsed = time.perf_counter() - start
    errors = {(m, N, f): e for m, N, f, e in blocks[1][1]}
    bad = monotone_violations(errors)
    ok = status == 0 and not bad and elapsed < 60
    detail = f"{len(blocks[0][1])} rows, {len(bad)} monotonicity violations, {elapsed:.2f} s (limit 60 s)"
    if bad:
        detail += f" {bad}"
    return report(7, "study ordering", ok, detail)


def criterion_8():
    margins = [optimality_margin(m, N, z, trials=100, scale=1e-3) for m, N, z in ((1, 5, 0.3), (2, 5, 0.7), (3, 10, 0.25))]
    worst = min(margins)
    return report(8, "optimality", worst >= -1e-12, f"min norm^2 increase {worst:.2e} (>= -1e-12)")


def test_criterion_1_exactness():
    assert criterion_1()


def test_criterion_2_kronecker():
    assert criterion_2()


def test_criterion_3_oracle_equivalence():
    assert criterion_3()


def test_criterion_4_operator_identities():
    assert criterion_4()


def test_criterion_5_norm():
    assert criterion_5()


def test_criterion_6_quadrature():
    assert criterion_6()


def test_criterion_7_study_ordering():
    assert criterion_7()


def test_criterion_8_optimality():
    assert criterion_8()


def test_explicit_route_used_for_sweep():
    # guards against the gate silently comparing the oracle with itself
    grid = GridSpec(3, 10)
    a = coefficients(grid, 0.37).coeffs
    b = solve_direct(grid, 0.37).coeffs
    assert coefficients(grid, 0.37).method == "explicit"
    assert np.max(np.abs(a - b)) <= 1e-8


if __name__ == "__main__":
    results = [f() for f in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8)]
    raise SystemExit(0 if all(results) else 1)
