"""Scalar building blocks: the Green-type kernel G_m, Euler-Frobenius
polynomials and forward differences of powers at zero."""

import math
from functools import lru_cache

import numpy as np

# Below this |x| the odd tail series is summed instead of sinh(x) minus its
# truncated Taylor polynomial; all terms are positive so nothing cancels.
SERIES_CUTOFF = 4.0


def _check_order(m):
    if int(m) != m or m < 1:
        raise ValueError(f"space order m must be a positive integer, got {m!r}")


def _tail_series(m, x):
    """sum_{k>=m} x^(2k-1)/(2k-1)! for x >= 0."""
    n = 2 * m - 1
    term = x**n / math.factorial(n)
    total = 0.0
    while term != 0.0:
        total += term
        if term < 1e-18 * total:
            break
        term *= x * x / ((n + 1) * (n + 2))
        n += 2
    return total


def _kernel_abs(m, x):
    if x < SERIES_CUTOFF:
        return 0.5 * _tail_series(m, x)
    odd_poly = math.fsum(x ** (2 * k - 1) / math.factorial(2 * k - 1) for k in range(1, m))
    return 0.5 * math.fsum([0.5 * math.exp(x), -0.5 * math.exp(-x), -odd_poly])


def green_kernel(m, x):
    """Evaluate G_m(x) = sgn(x)/2 * (sinh x - sum_{k=1}^{m-1} x^(2k-1)/(2k-1)!).

    G_m is even and G_m(0) = 0.  Accepts a scalar or an array.
    """
    _check_order(m)
    if np.ndim(x) == 0:
        return _kernel_abs(m, abs(float(x)))
    xs = np.asarray(x, dtype=float)
    out = np.empty(xs.shape)
    for idx, value in np.ndenumerate(xs):
        out[idx] = _kernel_abs(m, abs(value))
    return out


def odd_kernel(m, t):
    """sinh t - sum_{k=1}^{m-1} t^(2k-1)/(2k-1)!, i.e. 2 sgn(t) G_m(t), for scalar t."""
    t = float(t)
    value = 2.0 * _kernel_abs(m, abs(t))
    return value if t >= 0 else -value


@lru_cache(maxsize=None)
def _euler_frobenius_int(k):
    # Eulerian numbers: sum_j j^(k+1) t^j = t E_k(t) / (1-t)^(k+2).
    n = k + 1
    return tuple(
        sum((-1) ** j * math.comb(n + 1, j) * (i + 1 - j) ** n for j in range(i + 2))
        for i in range(n)
    )


def euler_frobenius(k):
    """Coefficients (ascending powers) of the Euler-Frobenius polynomial E_k.

    Normalised so that ``sum_{j>=1} j**(k+1) * t**j == t * E_k(t) / (1 - t)**(k + 2)``,
    giving E_0 = 1, E_1 = 1 + t, E_2 = 1 + 4t + t^2.
    """
    if int(k) != k or k < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {k!r}")
    return list(_euler_frobenius_int(int(k)))


@lru_cache(maxsize=None)
def delta_powers(nu, j):
    """nu-th forward difference of x**j at x = 0."""
    if nu < 0 or j < 0:
        raise ValueError("nu and j must be nonnegative")
    return sum((-1) ** (nu - s) * math.comb(nu, s) * s**j for s in range(nu + 1))


def power_series_sum(lam, i):
    """Closed form of sum_{g>=1} g**i * lam**g for |lam| < 1 (complex allowed)."""
    if i == 0:
        return lam / (1 - lam)
    return sum(delta_powers(nu, i) * lam**nu / (1 - lam) ** (nu + 1) for nu in range(1, i + 1))
