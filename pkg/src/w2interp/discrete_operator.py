"""Discrete analogue D_m(h*b) of d^{2m}/dx^{2m} - d^{2m-2}/dx^{2m-2}.

D_m is the sequence that inverts discrete convolution with G_m(h*b):
``D_m * G_m = delta``.  Away from the origin it is a sum of geometric
sequences in the stable roots of a palindromic characteristic polynomial.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DerivativeVanishes, NoConvergence, RootCountMismatch
from .kernel import euler_frobenius, green_kernel

MAX_SWEEPS = 500
SWEEP_TOL = 1e-15
POLISH_STEPS = 3
IMAG_TOL = 1e-10


@dataclass(frozen=True)
class CharPolynomial:
    m: int
    h: float
    coeffs: tuple  # ascending: p_0 ... p_{2m-2}

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if len(c) != 2 * self.m - 1:
            raise ValueError(f"expected {2 * self.m - 1} coefficients, got {len(c)}")
        scale = np.max(np.abs(c))
        if np.max(np.abs(c - c[::-1])) > 1e-12 * scale:
            raise ValueError("characteristic polynomial is not palindromic")

    @property
    def degree(self):
        return 2 * self.m - 2

    def __call__(self, lam):
        return P.polyval(lam, np.asarray(self.coeffs))

    def derivative(self, lam):
        return P.polyval(lam, P.polyder(np.asarray(self.coeffs)))


def _frac_poly(coeffs):
    return [Fraction(c) for c in coeffs]


def _padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _pscale(a, s):
    return [s * x for x in a]


def _one_minus_pow(k):
    out = [Fraction(1)]
    for _ in range(k):
        out = _pmul(out, [Fraction(1), Fraction(-1)])
    return out


@lru_cache(maxsize=None)
def _h_series(m, n_max):
    """Exact coefficients c_n(lam), n = 0..n_max, with P(lam) = 2 e^h sum_n h^n c_n(lam).

    Uses 1 - e^{2h} = -2 e^h sinh h and
    lam(e^{2h}+1) - e^h(lam^2+1) = -e^h [(1-lam)^2 - 2 lam (cosh h - 1)],
    so the O(h) parts of the two halves cancel in exact arithmetic.
    """
    deg = 2 * m - 2
    series = [[Fraction(0)] * (deg + 1) for _ in range(n_max + 1)]

    def add(n, poly):
        if n <= n_max:
            series[n] = _padd(series[n], poly)[: deg + 1]

    base = _one_minus_pow(deg)
    for n in range(1, n_max + 1, 2):
        add(n, _pscale(base, Fraction(-1, math.factorial(n))))
    for j in range(1, m):
        # bracket term h^{2j-1} (1-lam)^{2m-2-2j} E_{2j-2}(lam) / (2j-1)!
        term = _pmul(_one_minus_pow(deg - 2 * j), _frac_poly(euler_frobenius(2 * j - 2)))
        term = _pscale(term, Fraction(1, math.factorial(2 * j - 1)))
        add(2 * j - 1, _pmul(_one_minus_pow(2), term))
        lam_term = _pmul([Fraction(0), Fraction(-2)], term)
        for k in range(1, (n_max - 2 * j + 1) // 2 + 1):
            add(2 * k + 2 * j - 1, _pscale(lam_term, Fraction(1, math.factorial(2 * k))))
    return tuple(tuple(c) for c in series)


def char_polynomial(m, h):
    """Monomial coefficients p_0..p_{2m-2} of the characteristic polynomial.

    The polynomial is
    (1-e^{2h})(1-lam)^{2m-2} - 2(lam(e^{2h}+1) - e^h(lam^2+1))
        * sum_{j=1}^{m-1} h^{2j-1} (1-lam)^{2m-2-2j} E_{2j-2}(lam) / (2j-1)!
    For m = 1 it is the constant 1 - e^{2h}.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h!r}")
    if m == 1:
        return CharPolynomial(1, h, (-2.0 * math.exp(h) * math.sinh(h),))
    n_max = 2 * m + 40
    series = _h_series(m, n_max)
    coeffs = []
    for s in range(2 * m - 1):
        terms = [float(series[n][s]) * h**n for n in range(n_max + 1) if series[n][s] != 0]
        coeffs.append(2.0 * math.exp(h) * math.fsum(terms))
    return CharPolynomial(m, h, tuple(coeffs))


def durand_kerner(coeffs, max_sweeps=MAX_SWEEPS, tol=SWEEP_TOL):
    """All complex roots of the polynomial with ascending ``coeffs``."""
    c = np.asarray(coeffs, dtype=complex)
    c = c / c[-1]
    n = len(c) - 1
    if n == 0:
        return np.array([], dtype=complex)
    z = (0.4 + 0.9j) ** np.arange(n)
    for _ in range(max_sweeps):
        prev = z.copy()
        for i in range(n):
            others = z[i] - np.delete(z, i)
            z[i] = z[i] - P.polyval(z[i], c) / np.prod(others)
        if np.max(np.abs(z - prev) / np.maximum(1.0, np.abs(z))) < tol:
            break
    else:
        raise NoConvergence(f"Durand-Kerner did not converge in {max_sweeps} sweeps")
    dc = P.polyder(c)
    for _ in range(POLISH_STEPS):
        d = P.polyval(z, dc)
        step = np.where(d != 0, P.polyval(z, c) / np.where(d != 0, d, 1), 0)
        z = z - step
    return z


def _sort_key(lam):
    return (abs(lam), math.atan2(lam.imag, lam.real))


def stable_roots(p):
    """The m-1 roots of the characteristic polynomial inside the unit disk."""
    coeffs = np.asarray(p.coeffs, dtype=float)
    if p.degree == 0:
        return []
    if coeffs[-1] == 0:
        raise ValueError("leading coefficient vanishes")
    roots = durand_kerner(coeffs)
    scale = np.max(np.abs(coeffs))
    # residuals scale with |lam|^deg for the reciprocal (large) roots
    residual = np.max(np.abs(P.polyval(roots, coeffs)) / np.maximum(1.0, np.abs(roots)) ** p.degree)
    if residual > 1e-10 * scale:
        raise NoConvergence(f"root residual {residual:.3e} too large")
    gap = np.min(np.abs(np.abs(roots) - 1.0))
    inside = [complex(r) for r in roots if abs(r) < 1.0]
    if len(inside) != p.m - 1 or gap <= 1e-8:
        raise RootCountMismatch(
            f"{len(inside)} roots inside the unit disk, expected {p.m - 1} (min ||lam|-1| = {gap:.2e})"
        )
    # snap numerically real roots onto the real axis, keeping conjugate pairs exact
    cleaned = []
    for r in inside:
        if abs(r.imag) <= 1e-14 * max(1.0, abs(r)):
            r = complex(r.real, 0.0)
        cleaned.append(r)
    return sorted(cleaned, key=_sort_key)


@dataclass(frozen=True)
class OperatorData:
    m: int
    h: float
    charpoly: CharPolynomial
    bigC: float
    roots: tuple
    amps: tuple

    @property
    def p(self):
        """Leading coefficient p_{2m-2}, the overall normaliser of D_m."""
        return self.charpoly.coeffs[-1]

    @property
    def N(self):
        return round(1.0 / self.h)


def _quad_factor(lam, h):
    # lam(e^{2h}+1) - e^h(lam^2+1) without the O(h^0) cancellation
    return -math.exp(h) * ((1 - lam) ** 2 - 4 * lam * math.sinh(h / 2) ** 2)


def build_operator(m, N):
    """Precompute p_s, C, stable roots and amplitudes of D_m for h = 1/N."""
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N!r}")
    if N + 1 < m:
        raise ValueError(f"need N + 1 >= m (m={m}, N={N})")
    h = 1.0 / N
    cp = char_polynomial(m, h)
    if m == 1:
        return OperatorData(1, h, cp, 1.0 + math.exp(2 * h), (), ())
    c = cp.coeffs
    p_lead, p_next = c[-1], c[-2]
    bigC = 1.0 + (2 * m - 2) * math.exp(h) + math.exp(2 * h) + math.exp(h) * p_next / p_lead
    roots = stable_roots(cp)
    scale = max(abs(x) for x in c)
    amps = []
    for lam in roots:
        dP = cp.derivative(lam)
        if abs(dP) < 1e-14 * scale:
            raise DerivativeVanishes(f"P'(lam) = {abs(dP):.3e} at lam = {lam}")
        amps.append(2 * (1 - lam) ** (2 * m - 2) * _quad_factor(lam, h) * p_lead / (lam * dP))
    return OperatorData(m, h, cp, bigC, tuple(roots), tuple(amps))


def _real(value, scale):
    value = complex(value)
    if abs(value.imag) > IMAG_TOL * max(scale, abs(value.real), 1e-300):
        raise ArithmeticError(f"imaginary residue {value.imag:.3e} not negligible")
    return value.real


def center_bracket(op):
    """p * D_m(0) = 2C + sum_k A_k/lam_k.

    Evaluated through the equal form 4e^h - 2 sum_k A_k/(1-lam_k), which
    follows from D_m * 1 = 0 and avoids the cancellation between 2C and
    the large A_k/lam_k of small roots.
    """
    if not op.roots:
        return 2 * op.bigC
    total = 4 * math.exp(op.h) - 2 * sum(a / (1 - l) for a, l in zip(op.amps, op.roots))
    return _real(total, 4 * math.exp(op.h))


def d_m(op, beta):
    """D_m(h*beta) for an integer (or integer array) beta."""
    b = np.abs(np.asarray(beta))
    scalar = b.ndim == 0
    b = np.atleast_1d(b)
    out = np.zeros(b.shape, dtype=complex)
    far = b >= 1
    for lam, amp in zip(op.roots, op.amps):
        out[far] += amp * np.power(complex(lam), b[far] - 1.0)
    out[b == 1] -= 2 * math.exp(op.h)
    out[b == 0] = center_bracket(op)
    scale = max([abs(a) for a in op.amps] + [2 * math.exp(op.h)])
    vals = np.array([_real(v, scale) for v in out]) / op.p
    return float(vals[0]) if scalar else vals


def truncation_radius(op, eps=1e-16, cap=10_000):
    """Smallest B whose dropped tail terms fall below ``eps``.

    A tail term of D_m * f is bounded by |A_k/p| |lam_k|^(B-1) times the size
    of f at offset B; every sequence used here (e^{+-hb}, (hb)^n with
    n <= 2m-3, G_m(hb)) is at most e^{hB} (1 + hB)^(2m).
    """
    if not op.roots:
        return 1
    amp = max(abs(a / op.p) for a in op.amps)
    rho = max(abs(l) for l in op.roots)
    for B in range(1, cap + 1):
        growth = math.exp(op.h * B) * (1 + op.h * B) ** (2 * op.m)
        if amp * rho ** (B - 1) * growth < eps:
            return B
    return cap


def convolve(op, f, beta, radius=None):
    """Truncated discrete convolution sum_{|g|<=B} D_m(h g) f(beta - g).

    ``f`` maps an integer array of offsets to values.
    """
    B = truncation_radius(op) if radius is None else radius
    g = np.arange(-B, B + 1)
    weights = d_m(op, g)
    vals = np.asarray(f(beta - g), dtype=float)
    return math.fsum(weights * vals)


def kernel_sequence(m, h):
    """G_m(h*b) as a function of integer offsets b."""
    return lambda b: green_kernel(m, h * np.asarray(b, dtype=float))
