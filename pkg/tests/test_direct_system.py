import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from w2interp.checks import optimality_margin
from w2interp.direct_system import (
    CoefficientVector,
    assemble,
    constraint_residuals,
    lu_factor,
    lu_solve,
    norm_squared,
    quadratic_norm,
    solve_direct,
    system_residual,
)
from w2interp.errors import ConstraintViolation, SingularSystem
from w2interp.explicit_coeffs import coeffs_m1
from w2interp.grid import GridSpec
from w2interp.interpolator import norm_m1_squared

from oracles import mp_solve


def test_dimensions():
    A, b = assemble(GridSpec(1, 1), 0.5)
    assert A.shape == (3, 3) and b.shape == (3,)
    assert A[0, 0] == 0 and A[1, 1] == 0
    A, _ = assemble(GridSpec(3, 5), 0.5)
    assert A.shape == (9, 9)


def test_matrix_symmetric_with_kernel_block():
    grid = GridSpec(2, 5)
    A, _ = assemble(grid, 0.3)
    assert np.array_equal(A, A.T)
    x = grid.nodes
    d = x[:, None] - x[None, :]
    block = np.sign(d) / 2 * (np.sinh(d) - d)
    assert np.allclose(A[:6, :6], block, rtol=1e-14, atol=1e-18)


def test_assemble_rejects_z_outside():
    with pytest.raises(ValueError):
        assemble(GridSpec(2, 5), 1.2)


def test_node_gives_kronecker_and_zero_multipliers():
    cv = solve_direct(GridSpec(2, 5), 0.6)
    assert np.max(np.abs(cv.coeffs - np.eye(6)[3])) < 1e-12
    assert np.max(np.abs(cv.lagrange_poly)) < 1e-12
    assert abs(cv.lagrange_exp) < 1e-12


def test_m1_matches_closed_form():
    grid = GridSpec(1, 5)
    assert np.max(np.abs(solve_direct(grid, 0.3).coeffs - coeffs_m1(grid, 0.3).coeffs)) < 1e-10


def test_constraints_m2():
    grid = GridSpec(2, 5)
    cv = solve_direct(grid, 0.25)
    assert math.fsum(cv.coeffs) == pytest.approx(1.0, abs=1e-12)
    assert math.fsum(cv.coeffs * np.exp(-grid.nodes)) == pytest.approx(math.exp(-0.25), abs=1e-12)


@pytest.mark.parametrize("m, N, z", [(1, 5, 0.37), (2, 10, 0.05), (3, 5, 0.61), (3, 10, 0.93), (4, 8, 0.5)])
def test_against_extended_precision(m, N, z):
    ref = mp_solve(m, N, z)
    cv = solve_direct(GridSpec(m, N), z)
    assert np.max(np.abs(cv.coeffs - ref[: N + 1])) < 1e-10


@given(st.integers(1, 4), st.integers(3, 15), st.floats(0, 1))
def test_residual_small(m, N, z):
    grid = GridSpec(m, N)
    cv = solve_direct(grid, z)
    A, _ = assemble(grid, z)
    assert system_residual(grid, cv) <= 1e-10 * (1 + np.max(np.sum(np.abs(A), axis=1)))
    assert np.max(np.abs(constraint_residuals(grid, cv))) <= 1e-9


@given(st.integers(1, 3), st.sampled_from([5, 10]), st.floats(0, 1))
def test_norm_nonnegative(m, N, z):
    grid = GridSpec(m, N)
    cv = solve_direct(grid, z)
    assert quadratic_norm(grid, cv.coeffs, z) >= -1e-12
    assert norm_squared(grid, cv) >= 0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_norm_zero_at_nodes(m):
    grid = GridSpec(m, 5)
    for g in range(6):
        assert norm_squared(grid, solve_direct(grid, g * grid.h)) <= 1e-12


def test_norm_m1_cross_formula():
    grid = GridSpec(1, 5)
    cv = solve_direct(grid, 0.1)
    assert norm_squared(grid, cv) == pytest.approx(norm_m1_squared(grid, cv), abs=1e-10)


def test_norm_rejects_infeasible():
    grid = GridSpec(2, 5)
    cv = solve_direct(grid, 0.3)
    bad = CoefficientVector(0.3, cv.coeffs + 0.01, cv.lagrange_poly, cv.lagrange_exp)
    with pytest.raises(ConstraintViolation):
        norm_squared(grid, bad)


@pytest.mark.parametrize("m, N, z", [(1, 5, 0.3), (2, 5, 0.7), (3, 10, 0.25), (2, 10, 0.01)])
def test_optimality_under_feasible_perturbations(m, N, z):
    assert optimality_margin(m, N, z, trials=100, scale=1e-3) >= -1e-12


def test_second_difference_nonnegative():
    grid = GridSpec(3, 10)
    cv = solve_direct(grid, 0.42)
    x = grid.nodes
    cons = np.vstack([x**a for a in range(2)] + [np.exp(-x)])
    basis = np.linalg.svd(cons)[2][3:].T
    rng = np.random.default_rng(1)
    for _ in range(20):
        d = basis @ rng.standard_normal(basis.shape[1])
        d *= 1e-2 / np.linalg.norm(d)
        f = [quadratic_norm(grid, cv.coeffs + t * d, 0.42) for t in (-1, 0, 1)]
        assert f[0] - 2 * f[1] + f[2] >= -1e-15


def test_lu_detects_singular_matrix():
    with pytest.raises(SingularSystem):
        lu_factor(np.array([[1.0, 2.0], [2.0, 4.0]]))


@given(st.integers(2, 8), st.integers(0, 10_000))
def test_lu_solves_random_systems(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    b = rng.standard_normal(n)
    x = lu_solve(lu_factor(A), b)
    assert np.max(np.abs(A @ x - b)) < 1e-10


def test_lu_complex():
    A = np.array([[1 + 1j, 2], [0.5, 3 - 1j]])
    b = np.array([1.0, 2j])
    x = lu_solve(lu_factor(A), b)
    assert np.allclose(A @ x, b, atol=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("N", [5, 10])
def test_uniqueness_over_sweep(m, N):
    grid = GridSpec(m, N)
    for z in np.linspace(0, 1, 101):
        solve_direct(grid, float(z))


def test_points_within_node_tolerance_snap():
    grid = GridSpec(1, 5)
    assert grid.snap(0.6) == 3 * grid.h
    assert grid.snap(0.61) == 0.61
    assert grid.node_index(0.6 + 1e-9) is None
    assert norm_squared(grid, solve_direct(grid, 0.6)) <= 1e-24
