"""Applying optimal coefficients to data: interpolation, error norms and sweeps."""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .direct_system import norm_squared, solve_direct
from .errors import GridMismatch
from .explicit_coeffs import coeffs_m2_corollary, optimal_coefficients
from .grid import GridSpec

DEFAULT_ZGRID = 201
QUAD_POINTS = 64
NORM_QUAD_POINTS = 1024


@dataclass(frozen=True)
class BuiltinFunction:
    name: str
    label: str
    func: object  # z -> value, vectorised
    deriv: object  # (k, z) -> k-th derivative


def _sq_deriv(k, z):
    z = np.asarray(z, dtype=float)
    if k == 0:
        return z**2
    if k == 1:
        return 2 * z
    if k == 2:
        return np.full_like(z, 2.0)
    return np.zeros_like(z)


BUILTINS = {
    "sq": BuiltinFunction("sq", "z^2", lambda z: np.asarray(z, dtype=float) ** 2, _sq_deriv),
    "exp2": BuiltinFunction("exp2", "e^(2z)", lambda z: np.exp(2 * np.asarray(z, dtype=float)), lambda k, z: 2.0**k * np.exp(2 * np.asarray(z, dtype=float))),
    "sin": BuiltinFunction("sin", "sin z", np.sin, lambda k, z: np.sin(np.asarray(z, dtype=float) + k * math.pi / 2)),
}


def builtin(name):
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown function {name!r}; choose from {sorted(BUILTINS)}") from None


@dataclass(frozen=True)
class SampleSet:
    """Values phi(x_0)..phi(x_N) on the nodes of ``grid``.

    ``source`` is a provenance tag such as ``builtin:sin`` or ``file:data.csv``.
    """

    grid: GridSpec
    values: np.ndarray
    source: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.N + 1,):
            raise GridMismatch(f"expected {self.grid.N + 1} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_builtin(cls, grid, name):
        fn = builtin(name)
        return cls(grid, fn.func(grid.nodes), f"builtin:{name}")


@dataclass(frozen=True)
class ErrorReport:
    z_grid: np.ndarray
    abs_errors: np.ndarray
    max_error: float
    norm_values: np.ndarray


def default_zgrid(n=DEFAULT_ZGRID):
    """n equispaced points on [0, 1] including both ends."""
    if n < 2:
        raise ValueError(f"z-grid needs at least 2 points, got {n}")
    return np.linspace(0.0, 1.0, n)


def coefficients(grid, z, method="explicit"):
    """Optimal coefficients at z by the closed form, the dense solve or the m = 2 special case."""
    if method == "explicit":
        return optimal_coefficients(grid, z)
    if method == "direct":
        return solve_direct(grid, z)
    if method == "corollary":
        return coeffs_m2_corollary(grid, z)
    raise ValueError(f"unknown method {method!r}")


def interpolate(samples, cv):
    """sum_b C_b(z) phi(x_b)."""
    if not (0.0 <= cv.z <= 1.0):
        raise ValueError(f"z must lie in [0, 1], got {cv.z!r}")
    if len(cv.coeffs) != len(samples.values):
        raise GridMismatch(f"{len(cv.coeffs)} coefficients for {len(samples.values)} samples")
    return math.fsum(cv.coeffs * samples.values)


def norm_m1_squared(grid, cv):
    """1/4 sum_b C_b sgn(z - hb)(e^{z-hb} - e^{hb-z}) for m = 1."""
    if grid.m != 1:
        raise ValueError("norm_m1 requires m = 1")
    t = cv.z - grid.nodes
    return 0.25 * math.fsum(cv.coeffs * np.sign(t) * (np.exp(t) - np.exp(-t)))


def norm_m1(grid, cv):
    """Norm of the optimal error functional for m = 1 via its closed form."""
    value = norm_m1_squared(grid, cv)
    return math.sqrt(value) if value > 0 else 0.0


def error_norm(grid, cv):
    """Norm of the error functional from the quadratic form of the kernel."""
    value = norm_squared(grid, cv)
    return math.sqrt(value) if value > 0 else 0.0


def error_sweep(m, N, phi, z_grid=None, method="explicit"):
    """Pointwise |phi(z) - interpolant(z)| and optimal norms over ``z_grid``.

    ``phi`` is a builtin name or a vectorised callable.
    """
    grid = GridSpec(m, N)
    func = builtin(phi).func if isinstance(phi, str) else phi
    zs = default_zgrid() if z_grid is None else np.asarray(z_grid, dtype=float)
    samples = SampleSet(grid, func(grid.nodes), f"builtin:{phi}" if isinstance(phi, str) else "callable")
    exact = np.asarray(func(zs), dtype=float)
    errs = np.empty(len(zs))
    norms = np.empty(len(zs))
    for i, z in enumerate(zs):
        cv = coefficients(grid, float(z), method)
        errs[i] = abs(exact[i] - interpolate(samples, cv))
        norms[i] = error_norm(grid, cv)
    return ErrorReport(zs, errs, float(np.max(errs)), norms)


@lru_cache(maxsize=None)
def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def space_seminorm(fn, m, points=NORM_QUAD_POINTS):
    """sqrt of int_0^1 (phi^(m) + phi^(m-1))^2 by Gauss-Legendre quadrature."""
    if isinstance(fn, str):
        fn = builtin(fn)
    x, w = _gauss(points)
    z = 0.5 * (x + 1)
    integrand = (fn.deriv(m, z) + fn.deriv(m - 1, z)) ** 2
    return math.sqrt(0.5 * math.fsum(w * integrand))


def bound_violation(m, N, fn, z_grid=None, method="explicit"):
    """max over z of |error| - seminorm * norm; nonpositive when the bound holds."""
    if isinstance(fn, str):
        fn = builtin(fn)
    report = error_sweep(m, N, fn.func, z_grid, method)
    s = space_seminorm(fn, m)
    return float(np.max(report.abs_errors - s * report.norm_values))


def quadrature_weights(grid, points=QUAD_POINTS, method="explicit"):
    """w_b = int_0^1 C_b(z) dz by Gauss-Legendre with ``points`` nodes per cell.

    The coefficients are only piecewise smooth in z (breaks at the nodes), so
    each cell [hb, h(b+1)] gets its own rule.
    """
    x, w = _gauss(points)
    out = np.zeros(grid.N + 1)
    parts = [[] for _ in range(grid.N + 1)]
    for cell in range(grid.N):
        a = cell * grid.h
        for xi, wi in zip(x, w):
            z = a + 0.5 * grid.h * (xi + 1)
            c = coefficients(grid, z, method).coeffs
            for b in range(grid.N + 1):
                parts[b].append(0.5 * grid.h * wi * c[b])
    for b in range(grid.N + 1):
        out[b] = math.fsum(parts[b])
    return out
