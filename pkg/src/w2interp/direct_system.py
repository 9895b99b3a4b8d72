"""Dense solution of the Lagrange optimality system for the coefficients.

For nodes x_b = b h the unknowns C_0..C_N, p_0..p_{m-2}, d satisfy

    sum_g C_g G_m(x_b - x_g) + sum_a p_a x_b^a + d e^{-x_b} = G_m(z - x_b),  b = 0..N
    sum_g C_g x_g^a = z^a,                                                   a = 0..m-2
    sum_g C_g e^{-x_g} = e^{-z}

This is the reference route the closed-form coefficients are checked against.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConstraintViolation, SingularSystem
from .grid import GridSpec
from .kernel import green_kernel

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-13
COND_WARN = 1e12
CONSTRAINT_TOL = 1e-9
NEG_NORM_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientVector:
    z: float
    coeffs: np.ndarray
    lagrange_poly: np.ndarray
    lagrange_exp: float
    method: str = "direct"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "lagrange_poly", np.asarray(self.lagrange_poly, dtype=float))


def _check_z(z):
    if not (0.0 <= z <= 1.0):
        raise ValueError(f"z must lie in [0, 1], got {z!r}")


def system_matrix(grid):
    m, N = grid.m, grid.N
    x = grid.nodes
    n = N + m + 1
    A = np.zeros((n, n))
    A[: N + 1, : N + 1] = green_kernel(m, x[:, None] - x[None, :])
    for a in range(m - 1):
        A[: N + 1, N + 1 + a] = x**a
        A[N + 1 + a, : N + 1] = x**a
    A[: N + 1, -1] = np.exp(-x)
    A[-1, : N + 1] = np.exp(-x)
    return A


def system_rhs(grid, z):
    m, N = grid.m, grid.N
    rhs = np.empty(N + m + 1)
    rhs[: N + 1] = green_kernel(m, z - grid.nodes)
    rhs[N + 1 : N + m] = [z**a for a in range(m - 1)]
    rhs[-1] = math.exp(-z)
    return rhs


def assemble(grid, z):
    """Dense matrix and right-hand side of the optimality system, size N+m+1."""
    _check_z(z)
    return system_matrix(grid), system_rhs(grid, z)


def lu_factor(A, pivot_tol=PIVOT_TOL):
    """Gaussian elimination with partial pivoting; returns (LU, perm)."""
    A = np.asarray(A)
    lu = np.array(A, dtype=np.result_type(A.dtype, float))
    n = lu.shape[0]
    perm = np.arange(n)
    threshold = pivot_tol * np.max(np.abs(lu))
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < threshold:
            raise SingularSystem(f"pivot {abs(lu[p, k]):.3e} below {threshold:.3e} at column {k}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1 :, k] /= lu[k, k]
        lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm


def lu_solve(factors, b):
    lu, perm = factors
    b = np.asarray(b)
    y = np.array(b, dtype=np.result_type(lu.dtype, b.dtype))[perm]
    n = len(y)
    for i in range(1, n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1 :] @ y[i + 1 :]) / lu[i, i]
    return y


def solve_refined(A, factors, b, steps=1):
    x = lu_solve(factors, b)
    for _ in range(steps):
        x = x + lu_solve(factors, b - A @ x)
    return x


@lru_cache(maxsize=64)
def _factored(grid):
    A = system_matrix(grid)
    factors = lu_factor(A)
    cond = np.linalg.cond(A)
    if cond > COND_WARN:
        log.warning("optimality system for m=%d N=%d has condition number %.2e", grid.m, grid.N, cond)
    return A, factors


def solve_direct(grid, z):
    """Optimal coefficients at z from the dense Lagrange system."""
    _check_z(z)
    z = grid.snap(z)
    A, factors = _factored(grid)
    b = system_rhs(grid, z)
    sol = solve_refined(A, factors, b)
    N = grid.N
    return CoefficientVector(float(z), sol[: N + 1], sol[N + 1 : N + grid.m], float(sol[-1]), "direct")


def constraint_residuals(grid, cv):
    """Residuals of the polynomial and e^{-x} exactness conditions."""
    x = grid.nodes
    c = cv.coeffs
    res = [math.fsum(c * x**a) - cv.z**a for a in range(grid.m - 1)]
    res.append(math.fsum(c * np.exp(-x)) - math.exp(-cv.z))
    return np.array(res)


def quadratic_norm(grid, coeffs, z):
    """(-1)^m (sum C_b C_g G(x_b - x_g) - 2 sum C_b G(z - x_b)), no checks."""
    x = grid.nodes
    c = np.asarray(coeffs, dtype=float)
    K = green_kernel(grid.m, x[:, None] - x[None, :])
    g = green_kernel(grid.m, z - x)
    value = math.fsum((np.outer(c, c) * K).ravel()) - 2 * math.fsum(c * g)
    return (-1) ** grid.m * value


def norm_squared(grid, cv, tol=CONSTRAINT_TOL):
    """Squared norm of the error functional for coefficients ``cv``.

    Only meaningful when the exactness conditions hold; clamped at zero
    for roundoff-sized negatives.
    """
    res = constraint_residuals(grid, cv)
    if np.max(np.abs(res)) > tol:
        raise ConstraintViolation(f"exactness conditions violated by {np.max(np.abs(res)):.3e}")
    value = quadratic_norm(grid, cv.coeffs, cv.z)
    if value < -NEG_NORM_TOL:
        raise ArithmeticError(f"squared norm {value:.3e} is negative beyond roundoff")
    return value if value > 0 else 0.0


def system_residual(grid, cv):
    A, b = assemble(grid, cv.z)
    x = np.concatenate([cv.coeffs, cv.lagrange_poly, [cv.lagrange_exp]])
    return np.max(np.abs(A @ x - b))


__all__ = [
    "CoefficientVector",
    "GridSpec",
    "assemble",
    "constraint_residuals",
    "lu_factor",
    "lu_solve",
    "norm_squared",
    "quadratic_norm",
    "solve_direct",
    "system_residual",
]
