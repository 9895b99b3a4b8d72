"""Measured invariants of the construction, shared by the self-test and the test suite.

Each measurement returns a number; ``run_suite`` pairs them with tolerances.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .direct_system import constraint_residuals, quadratic_norm, solve_direct
from .discrete_operator import convolve, kernel_sequence, truncation_radius
from .explicit_coeffs import (
    boundary_systems,
    coeffs_general,
    coeffs_m2_corollary,
    continuation,
    operator_for,
    optimal_coefficients,
)
from .grid import GridSpec
from .interpolator import BUILTINS, SampleSet, coefficients, error_norm, interpolate, norm_m1_squared, quadrature_weights
from .kernel import euler_frobenius, green_kernel

ORDERS = (1, 2, 3)
SIZES = (5, 10)
SWEEP = np.linspace(0.0, 1.0, 101)
STUDY_GRID = np.linspace(0.0, 1.0, 201)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (tol {self.tol:.0e})"


def _pairs(orders=ORDERS, sizes=SIZES):
    return [(m, N) for m in orders for N in sizes]


def exactness_residual(m, N, zs=SWEEP):
    """max |sum C x^a - z^a| (a <= m-2) and |sum C e^{-x} - e^{-z}| over zs."""
    grid = GridSpec(m, N)
    worst = 0.0
    for z in zs:
        cv = optimal_coefficients(grid, float(z))
        worst = max(worst, float(np.max(np.abs(constraint_residuals(grid, cv)))))
    return worst


def kronecker_residual(m, N, method="explicit"):
    grid = GridSpec(m, N)
    worst = 0.0
    for g in range(N + 1):
        c = coefficients(grid, g * grid.h, method).coeffs
        worst = max(worst, float(np.max(np.abs(c - np.eye(N + 1)[g]))))
    return worst


def oracle_discrepancy(m, N, zs=SWEEP):
    grid = GridSpec(m, N)
    return max(
        float(np.max(np.abs(optimal_coefficients(grid, float(z)).coeffs - solve_direct(grid, float(z)).coeffs)))
        for z in zs
    )


def special_case_discrepancy(N, zs=SWEEP, against="general"):
    """m = 2 special-case formulas against the general closed form or the dense solve."""
    grid = GridSpec(2, N)
    ref = optimal_coefficients if against == "general" else solve_direct
    return max(
        float(np.max(np.abs(coeffs_m2_corollary(grid, float(z)).coeffs - ref(grid, float(z)).coeffs))) for z in zs
    )


def printed_route_discrepancy(m, N, zs=SWEEP):
    """Closed-form route summed term by term (no cancellation control) against the dense solve."""
    from .explicit_coeffs import coeffs_from_displays

    grid = GridSpec(m, N)
    op = operator_for(m, N)
    worst = 0.0
    for z in zs:
        tail = boundary_systems(op, grid, float(z), method="printed")
        c = coeffs_from_displays(op, grid, tail, float(z)).coeffs
        worst = max(worst, float(np.max(np.abs(c - solve_direct(grid, float(z)).coeffs))))
    return worst


def operator_residuals(m, N):
    """Convolution residuals of D_m against its null space and against G_m.

    Returns (annihilation residual, delta residual) over b = 0..N.
    """
    op = operator_for(m, N)
    h = op.h
    seqs = [lambda b: np.exp(h * np.asarray(b, dtype=float)), lambda b: np.exp(-h * np.asarray(b, dtype=float))]
    seqs += [lambda b, n=n: (h * np.asarray(b, dtype=float)) ** n for n in range(2 * m - 2)]
    radius = truncation_radius(op)
    ann = max(abs(convolve(op, f, b, radius)) for f in seqs for b in range(N + 1))
    G = kernel_sequence(m, h)
    delta = max(abs(convolve(op, G, b, radius) - (1.0 if b == 0 else 0.0)) for b in range(N + 1))
    return ann, delta


def continuation_residual(m, N, zs=(0.05, 0.3, 0.77)):
    """|D_m * u_m| at the m-1 positions beyond each end, u_m built from the boundary tail."""
    op = operator_for(m, N)
    grid = GridSpec(m, N)
    radius = truncation_radius(op)
    worst = 0.0
    for z in zs:
        tail = boundary_systems(op, grid, z)

        def u(bs, tail=tail):
            return np.array([continuation(m, N, tail, int(b)) for b in np.atleast_1d(bs)])

        for b in list(range(-(m - 1), 0)) + list(range(N + 1, N + m)):
            worst = max(worst, abs(convolve(op, u, b, radius)))
    return worst


def min_norm_squared(m, N, zs=SWEEP):
    grid = GridSpec(m, N)
    return min(quadratic_norm(grid, optimal_coefficients(grid, float(z)).coeffs, float(z)) for z in zs)


def node_norm(m, N):
    grid = GridSpec(m, N)
    return max(error_norm(grid, optimal_coefficients(grid, g * grid.h)) for g in range(N + 1))


def m1_norm_agreement(N, zs=SWEEP):
    """Closed-form m = 1 squared norm against the quadratic-form value."""
    grid = GridSpec(1, N)
    worst = 0.0
    for z in zs:
        cv = optimal_coefficients(grid, float(z))
        worst = max(worst, abs(norm_m1_squared(grid, cv) - quadratic_norm(grid, cv.coeffs, float(z))))
    return worst


def quadrature_residual(m, N):
    grid = GridSpec(m, N)
    w = quadrature_weights(grid)
    x = grid.nodes
    res = [abs(math.fsum(w * x**a) - 1.0 / (a + 1)) for a in range(m - 1)]
    res.append(abs(math.fsum(w * np.exp(-x)) - (1 - math.exp(-1))))
    return max(res)


def study_max_errors(orders=ORDERS, sizes=SIZES, functions=tuple(BUILTINS), zs=STUDY_GRID):
    """{(m, N, name): max |phi - interpolant|} sharing coefficients across functions."""
    out = {}
    for m, N in _pairs(orders, sizes):
        grid = GridSpec(m, N)
        samples = {f: SampleSet.from_builtin(grid, f) for f in functions}
        errs = {f: 0.0 for f in functions}
        for z in zs:
            cv = optimal_coefficients(grid, float(z))
            for f in functions:
                exact = float(BUILTINS[f].func(float(z)))
                errs[f] = max(errs[f], abs(exact - interpolate(samples[f], cv)))
        for f in functions:
            out[(m, N, f)] = errs[f]
    return out


def monotone_violations(errors, orders=ORDERS, sizes=SIZES, functions=tuple(BUILTINS)):
    """Pairs where the max error fails to decrease strictly along N or along m."""
    bad = []
    for f in functions:
        for m in orders:
            for a, b in zip(sizes, sizes[1:]):
                if not errors[(m, b, f)] < errors[(m, a, f)]:
                    bad.append((f, "N", m, a, b))
        for N in sizes:
            for a, b in zip(orders, orders[1:]):
                if not errors[(b, N, f)] < errors[(a, N, f)]:
                    bad.append((f, "m", N, a, b))
    return bad


def optimality_margin(m, N, z, trials=100, scale=1e-3, seed=0):
    """min over random feasible perturbations of (norm^2(perturbed) - norm^2(optimal))."""
    grid = GridSpec(m, N)
    x = grid.nodes
    opt = solve_direct(grid, z)
    cons = np.vstack([x**a for a in range(m - 1)] + [np.exp(-x)])
    _, _, vt = np.linalg.svd(cons)
    basis = vt[cons.shape[0] :].T
    rng = np.random.default_rng(seed)
    base = quadratic_norm(grid, opt.coeffs, z)
    worst = math.inf
    for _ in range(trials):
        delta = basis @ rng.standard_normal(basis.shape[1])
        delta *= scale / np.linalg.norm(delta)
        worst = min(worst, quadratic_norm(grid, opt.coeffs + delta, z) - base)
    return worst


def kernel_checks():
    """Evenness, zero at the origin and Euler-Frobenius against brute-force power sums."""
    xs = np.linspace(-3, 3, 61)
    worst = 0.0
    for m in (1, 2, 3, 4):
        worst = max(worst, float(np.max(np.abs(green_kernel(m, xs) - green_kernel(m, -xs)))), abs(green_kernel(m, 0.0)))
    for k in range(5):
        coeffs = euler_frobenius(k)
        for lam in (0.1, 0.3, -0.4):
            brute = math.fsum(j ** (k + 1) * lam**j for j in range(1, 400))
            closed = lam * sum(c * lam**i for i, c in enumerate(coeffs)) / (1 - lam) ** (k + 2)
            worst = max(worst, abs(brute - closed) / max(1.0, abs(closed)))
    return worst


def run_suite(quick=False):
    """All invariant checks with their tolerances, in a fixed order."""
    zs = SWEEP[::10] if quick else SWEEP
    results = []

    def add(name, value, tol, passed=None):
        results.append(CheckResult(name, float(value), tol, value <= tol if passed is None else passed))

    add("kernel evenness and Euler-Frobenius identity", kernel_checks(), 1e-12)
    for m, N in _pairs():
        ann, delta = operator_residuals(m, N)
        add(f"D_m annihilates e^(+-x), x^n  m={m} N={N}", ann, 1e-8)
        add(f"D_m * G_m = delta  m={m} N={N}", delta, 1e-8)
    for m, N in _pairs():
        add(f"exactness  m={m} N={N}", exactness_residual(m, N, zs), 1e-9)
        add(f"Kronecker property  m={m} N={N}", kronecker_residual(m, N), 1e-9)
        add(f"closed form vs dense solve  m={m} N={N}", oracle_discrepancy(m, N, zs), 1e-8)
        add(f"norm^2 >= 0  m={m} N={N}", -min_norm_squared(m, N, zs), 1e-12)
        add(f"norm at nodes  m={m} N={N}", node_norm(m, N), 1e-12)
        if m >= 2:
            add(f"continuation solves D_m * u = 0 outside  m={m} N={N}", continuation_residual(m, N), 1e-8)
    for N in SIZES:
        add(f"m=2 special case vs general  N={N}", special_case_discrepancy(N, zs), 1e-9)
        add(f"m=1 norm closed form vs quadratic form  N={N}", m1_norm_agreement(N, zs), 1e-10)
    if not quick:
        for m, N in _pairs():
            add(f"integrated weights reproduce moments  m={m} N={N}", quadrature_residual(m, N), 1e-8)
    for m, N, z in ((1, 5, 0.3), (2, 5, 0.7), (3, 10, 0.25)):
        add(f"optimality under feasible perturbation  m={m} N={N} z={z}", -optimality_margin(m, N, z), 1e-12)
    return results


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - start
