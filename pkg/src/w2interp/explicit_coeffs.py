"""Closed-form optimal coefficients on equally spaced nodes.

m = 1 has a direct formula.  For m >= 2 the coefficients are the discrete
convolution C_b = D_m * u_m, where u_m equals G_m(z - h b) on the nodes and
is continued outside [0, 1] by

    b <= 0:  -e^{hb - z}/4 + a^- e^{-hb} + Q(hb) + R^-(hb)
    b >= N:   e^{hb - z}/4 + a^+ e^{-hb} - Q(hb) + R^+(hb)

Q is known; the boundary unknowns r^-_i, r^+_i (coefficients of R^-, R^+)
come from a 2m-2 linear system expressing D_m * u_m = 0 just outside the
nodes, and a^-, a^+ follow from continuity at b = 0 and b = N.

Two evaluations of this construction are provided.  ``boundary_matrix`` and
``coeffs_from_displays`` sum every tail series in closed form term by term;
the right-hand sides then come out as differences of O(1) quantities, which
costs about four digits.  The default route writes each tail as
G_m(z - x) continued analytically plus a small correction

    left:   r~^-_0 (1 - e^{-x}) + sum_{i>=1} r~^-_i x^i
    right:  sum_i r~^+_i (x^i - e^{1-x})

and uses that D_m annihilates e^{+-x} and polynomials of degree <= 2m-3,
so every convolution reduces to a one-sided sum with no cancellation.  The
unknowns relate by r^- = R_z + r~^-, r^+ = r~^+ - R_z, where R_z is R with
the moments replaced by z^a.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .direct_system import CoefficientVector, lu_factor, lu_solve
from .discrete_operator import build_operator, center_bracket
from .errors import SingularBoundarySystem, SingularSystem
from .kernel import green_kernel, odd_kernel, power_series_sum

IMAG_TOL = 1e-10
SUM_REL_TOL = 1e-18
MAX_TERMS = 100_000


@lru_cache(maxsize=64)
def operator_for(m, N):
    return build_operator(m, N)


def _sgn(x):
    return float(x > 0) - float(x < 0)


# -- closed-form tail sums ---------------------------------------------------


def _geo_exp(lam, s):
    """sum_{g>=1} lam^g e^{s g}."""
    q = lam * math.exp(s)
    if abs(q) >= 1:
        raise ArithmeticError(f"|lam e^s| = {abs(q):.3f} >= 1, tail series diverges")
    return q / (1 - q)


def _binom_power_sum(lam, i, h):
    """sum_{j=1}^{i} C(i,j) h^j sum_{g>=1} g^j lam^g."""
    return sum(math.comb(i, j) * h**j * power_series_sum(lam, j) for j in range(1, i + 1))


def _split_pow(lam, beta, i):
    """sum_{g>=1, g != beta} lam^|beta-g| g^i for an integer beta >= 1."""
    head = sum(lam ** (beta - g) * g**i for g in range(1, beta))
    tail = sum(math.comb(i, j) * beta ** (i - j) * power_series_sum(lam, j) for j in range(i + 1))
    return head + tail


def _split_exp(lam, beta, s):
    """sum_{g>=1, g != beta} lam^|beta-g| e^{s g} for an integer beta >= 1."""
    head = sum(lam ** (beta - g) * math.exp(s * g) for g in range(1, beta))
    return head + math.exp(s * beta) * _geo_exp(lam, s)


def _sinh_sum(lam, h):
    """sum_{g>=1} lam^g sinh(h g) = lam sinh h / (lam^2 + 1 - 2 lam cosh h)."""
    return lam * math.sinh(h) / (lam**2 + 1 - 2 * lam * math.cosh(h))


# -- known parts of the continuation -----------------------------------------


def q_coeffs(m, z):
    """Coefficients q_0..q_{2m-3} of the known polynomial Q in the tails."""
    if m < 2:
        raise ValueError("Q is only defined for m >= 2")
    q = [0.0] * (2 * m - 2)
    split = (m + 1) // 2
    for k in range(1, m):
        top = 2 * k - 1 if k < split else m - 2
        for a in range(top + 1):
            deg = 2 * k - 1 - a
            q[deg] += 0.5 * (-1) ** a * z**a / (math.factorial(deg) * math.factorial(a))
    return q


def r_coeffs(m, moments):
    """Coefficients r_0..r_{m-2} of R given moments mu_a = sum_g C_g (h g)^a, a < 2m-2."""
    r = [0.0] * (m - 1)
    for k in range((m + 1) // 2, m):
        for a in range(m - 1, 2 * k):
            deg = 2 * k - 1 - a
            r[deg] += 0.5 * (-1) ** a * moments[a] / (math.factorial(deg) * math.factorial(a))
    return r


@dataclass(frozen=True)
class BoundaryTail:
    z: float
    q: tuple
    r_minus: tuple
    r_plus: tuple
    a_minus: float
    a_plus: float
    M: tuple
    Nk: tuple
    corr_minus: tuple = None
    corr_plus: tuple = None

    @property
    def d_lag(self):
        if self.corr_minus is not None:
            # a^- = e^z/4 - r~^-_0 and a^+ = -e^z/4 - e sum_i r~^+_i
            return 0.5 * (-self.corr_minus[0] - math.e * math.fsum(self.corr_plus))
        return 0.5 * (self.a_minus + self.a_plus)

    @property
    def D_cap(self):
        return 0.5 * (self.a_minus - self.a_plus)

    @property
    def lagrange_poly(self):
        """p_0..p_{m-2}: the half-sum of R^- and R^+."""
        if self.corr_minus is not None:
            return tuple(0.5 * (a + b) for a, b in zip(self.corr_minus, self.corr_plus))
        return tuple(0.5 * (a + b) for a, b in zip(self.r_minus, self.r_plus))


def _polyval(c, x):
    return sum(ci * x**i for i, ci in enumerate(c))


def a_minus_from(m, z, q, r_minus):
    return green_kernel(m, z) + 0.25 * math.exp(-z) - q[0] - r_minus[0]


def a_plus_from(m, z, q, r_plus):
    return math.e * (green_kernel(m, z - 1) - 0.25 * math.exp(1 - z) + sum(q) - sum(r_plus))


def continuation(m, N, tail, beta):
    """u_m(h beta) for any integer beta."""
    h = 1.0 / N
    x = h * beta
    z = tail.z
    if beta < 0:
        return -0.25 * math.exp(x - z) + tail.a_minus * math.exp(-x) + _polyval(tail.q, x) + _polyval(tail.r_minus, x)
    if beta > N:
        return 0.25 * math.exp(x - z) + tail.a_plus * math.exp(-x) - _polyval(tail.q, x) + _polyval(tail.r_plus, x)
    return green_kernel(m, z - x)


def _tail_constants(op, N, z, q, r_minus, r_plus, a_minus, a_plus):
    """M_k = sum_{g>=1} lam_k^g u(-g h) and N_k = sum_{g>=1} lam_k^g u(1 + g h)."""
    h = op.h
    M, Nk = [], []
    for lam in op.roots:
        s = [power_series_sum(lam, i) for i in range(2 * op.m - 2)]
        mk = lam * math.exp(-z) / (4 * (lam - math.exp(h))) + a_minus * lam * math.exp(h) / (1 - lam * math.exp(h))
        mk += sum(q[i] * (-h) ** i * s[i] for i in range(1, len(q))) + q[0] * s[0]
        mk += sum(r_minus[i] * (-h) ** i * s[i] for i in range(1, len(r_minus))) + r_minus[0] * s[0]
        nk = lam * math.exp(1 - z + h) / (4 * (1 - lam * math.exp(h))) + a_plus * lam / (math.e * (math.exp(h) - lam))
        nk -= sum(q[i] * _binom_power_sum(lam, i, h) for i in range(1, len(q))) + sum(q) * s[0]
        nk += sum(r_plus[i] * _binom_power_sum(lam, i, h) for i in range(1, len(r_plus))) + sum(r_plus) * s[0]
        M.append(mk)
        Nk.append(nk)
    return tuple(M), tuple(Nk)


# -- boundary system -----------------------------------------------------------


def boundary_matrix(op, N, z):
    """Left block system for (r^-, r^+): rows beta = 1..m-1 left, then right.

    Returns (matrix, rhs) of size 2m-2 built from the closed-form entries
    B^-, B^+, T (left boundary) and A^-, A^+, S (right boundary).

    In every entry the g = beta term of sum_k (A_k/lam_k) sum_g lam_k^|beta-g| f(g)
    is folded into the 2C f(beta) term, giving center_bracket * f(beta); the
    split sums below therefore skip g = beta.
    """
    m, h = op.m, op.h
    C = center_bracket(op) / 2
    eh = math.exp(h)
    q = q_coeffs(m, z)
    Gz, Gz1 = green_kernel(m, z), green_kernel(m, z - 1)
    nodes_G = green_kernel(m, z - h * np.arange(N + 1))
    n = m - 1
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs = np.zeros(2 * n, dtype=complex)
    lams, ws = op.roots, [a / l for a, l in zip(op.amps, op.roots)]

    def two_sided(f, beta):
        # (2C + sum_k A_k/lam_k) f(beta) - 2e^h (f(beta-1) + f(beta+1))
        return 2 * C * f(beta) - 2 * eh * (f(beta - 1) + f(beta + 1))

    def binom_shift(i, t):
        # sum_{j=1}^{i} C(i,j) t^j  = (1+t)^i - 1
        return sum(math.comb(i, j) * t**j for j in range(1, i + 1))

    for row, beta in enumerate(range(1, m)):
        # left boundary: D_m * u_m = 0 at position -beta
        mat[row, 0] = two_sided(lambda b: 1 - math.exp(h * b), beta) + sum(
            w * (_split_pow(l, beta, 0) - _split_exp(l, beta, h)) for l, w in zip(lams, ws)
        )
        for i in range(1, n):
            mat[row, i] = (-h) ** i * (
                two_sided(lambda b: b**i, beta) + sum(w * _split_pow(l, beta, i) for l, w in zip(lams, ws))
            )
        mat[row, n] = sum(
            a * l ** (N + beta) * (eh - 1) / ((1 - l) * (eh - l)) for l, a in zip(lams, op.amps)
        )
        for i in range(1, n):
            mat[row, n + i] = sum(
                w * l ** (N + beta) * (_binom_power_sum(l, i, h) + l * (eh - 1) / ((1 - l) * (eh - l)))
                for l, w in zip(lams, ws)
            )
        T = math.exp(-z) * (C * math.sinh(h * beta) - eh * (math.sinh(h * (beta - 1)) + math.sinh(h * (beta + 1))))
        T += Gz * two_sided(lambda b: math.exp(h * b), beta)
        T += sum(q[i] * (-h) ** i * two_sided(lambda b: b**i, beta) for i in range(1, len(q)))
        T += q[0] * two_sided(lambda b: 1 - math.exp(h * b), beta)
        T = -T
        for l, w in zip(lams, ws):
            inner = sum(l ** (g + beta) * nodes_G[g] for g in range(N + 1))
            inner += math.exp(-z) / 4 * (_split_exp(l, beta, h) - _split_exp(l, beta, -h))
            inner += Gz * _split_exp(l, beta, h)
            inner += sum(q[i] * (-h) ** i * _split_pow(l, beta, i) for i in range(1, len(q)))
            inner += q[0] * (_split_pow(l, beta, 0) - _split_exp(l, beta, h))
            far = math.exp(1 - z) * _sinh_sum(l, h) / 2 + l / (eh - l) * Gz1
            far += sum(
                qi * (l * (1 - eh) / ((eh - l) * (1 - l)) - _binom_power_sum(l, i, h)) for i, qi in enumerate(q)
            )
            inner += l ** (N + beta) * far
            T -= w * inner
        rhs[row] = T

        # right boundary: D_m * u_m = 0 at position N + beta
        r2 = n + row
        mat[r2, 0] = sum(a * l ** (N + beta) * (1 - eh) / ((1 - l) * (1 - eh * l)) for l, a in zip(lams, op.amps))
        for i in range(1, n):
            mat[r2, i] = (-h) ** i * sum(w * l ** (N + beta) * power_series_sum(l, i) for l, w in zip(lams, ws))
        mat[r2, n] = two_sided(lambda b: 1 - math.exp(-h * b), beta) + sum(
            w * (_split_pow(l, beta, 0) - _split_exp(l, beta, -h)) for l, w in zip(lams, ws)
        )
        for i in range(1, n):
            split = sum(
                w
                * (
                    sum(math.comb(i, j) * h**j * _split_pow(l, beta, j) for j in range(1, i + 1))
                    + _split_pow(l, beta, 0)
                    - _split_exp(l, beta, -h)
                )
                for l, w in zip(lams, ws)
            )
            mat[r2, n + i] = split + two_sided(lambda b: binom_shift(i, h * b) + 1 - math.exp(-h * b), beta)
        S = math.exp(1 - z) * (C * math.sinh(h * beta) - eh * (math.sinh(h * (beta - 1)) + math.sinh(h * (beta + 1))))
        S += Gz1 * two_sided(lambda b: math.exp(-h * b), beta)
        S += sum(qi * two_sided(lambda b: math.exp(-h * b) - 1 - binom_shift(i, h * b), beta) for i, qi in enumerate(q))
        S = -S
        for l, w in zip(lams, ws):
            inner = sum(l ** (N + beta - g) * nodes_G[g] for g in range(N + 1))
            near = math.exp(-z) * _sinh_sum(l, h) / 2 + Gz * l * eh / (1 - eh * l)
            near += sum(q[i] * (-h) ** i * power_series_sum(l, i) for i in range(1, len(q)))
            near += q[0] * l * (1 - eh) / ((1 - l) * (1 - l * eh))
            inner += l ** (N + beta) * near
            inner += math.exp(1 - z) / 4 * (_split_exp(l, beta, h) - _split_exp(l, beta, -h))
            inner += Gz1 * _split_exp(l, beta, -h)
            inner += sum(
                qi
                * (
                    _split_exp(l, beta, -h)
                    - _split_pow(l, beta, 0)
                    - sum(math.comb(i, j) * h**j * _split_pow(l, beta, j) for j in range(1, i + 1))
                )
                for i, qi in enumerate(q)
            )
            S -= w * inner
        rhs[r2] = S
    return mat, rhs


def _as_real(values, what):
    arr = np.asarray(values, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
    if arr.size and np.max(np.abs(arr.imag)) > IMAG_TOL * scale:
        raise ArithmeticError(f"{what} has a non-negligible imaginary part")
    return arr.real


def _printed_tail(op, grid, z):
    m, N = grid.m, grid.N
    mat, rhs = boundary_matrix(op, N, z)
    mat_r = _as_real(mat, "boundary matrix")
    rhs_r = _as_real(rhs, "boundary right-hand side")
    try:
        factors = lu_factor(mat_r)
    except SingularSystem as exc:
        raise SingularBoundarySystem(str(exc)) from exc
    sol = lu_solve(factors, rhs_r)
    sol = sol + lu_solve(factors, rhs_r - mat_r @ sol)
    n = m - 1
    q = q_coeffs(m, z)
    r_minus, r_plus = tuple(map(float, sol[:n])), tuple(map(float, sol[n:]))
    a_minus = a_minus_from(m, z, q, r_minus)
    a_plus = a_plus_from(m, z, q, r_plus)
    M, Nk = _tail_constants(op, N, z, q, r_minus, r_plus, a_minus, a_plus)
    return BoundaryTail(float(z), tuple(q), r_minus, r_plus, a_minus, a_plus, M, Nk)


# -- cancellation-free route -----------------------------------------------------


def _far_indices(grid, z):
    """Last node index strictly left of z and first strictly right of it."""
    b = grid.node_index(z)
    if b is not None:
        return b - 1, b + 1
    left = math.floor(z * grid.N)
    if left * grid.h >= z:
        left -= 1
    return left, left + 1


def _kernel_run(m, h, lam, z, first, step):
    """sum_{j>=0} lam^j g(|h (first + step j) - z|) with g(t) = 2 G_m(t)."""
    rho = abs(lam)
    if rho * math.exp(h) >= 1:
        raise ArithmeticError(f"|lam| e^h = {rho * math.exp(h):.3f} >= 1, kernel run diverges")
    total, mass, prev = 0j, 0.0, 0.0
    power = 1 + 0j
    for j in range(MAX_TERMS):
        term_abs = odd_kernel(m, abs(h * (first + step * j) - z))
        total += power * term_abs
        mag = rho**j * term_abs
        mass += mag
        if j > 0 and mag <= prev and mag < SUM_REL_TOL * mass:
            return total
        prev = mag
        power *= lam
    raise ArithmeticError("kernel run did not converge")


def _root_tables(op):
    """Per-root closed forms of sum_{t>=1} lam^t f(t) for the correction bases.

    phi[i]   : f = phi_i(h t)      phi_0(x) = 1 - e^{-x}, phi_i(x) = x^i
    phim[i]  : f = phi_i(-h t)
    psi[i]   : f = psi_i(1 + h t)  psi_i(x) = x^i - e^{1-x}
    psim[i]  : f = psi_i(1 - h t)
    """
    m, h = op.m, op.h
    em1, eh = math.expm1(h), math.exp(h)
    tables = []
    for lam in op.roots:
        s = [power_series_sum(lam, i) for i in range(m - 1)]
        phi0 = lam * em1 / ((1 - lam) * (eh - lam))
        phim0 = -lam * em1 / ((1 - lam) * (1 - lam * eh))
        phi = [phi0] + [h**i * s[i] for i in range(1, m - 1)]
        phim = [phim0] + [(-h) ** i * s[i] for i in range(1, m - 1)]
        psi = [phi0 + sum(math.comb(i, j) * h**j * s[j] for j in range(1, i + 1)) for i in range(m - 1)]
        psim = [phim0 + sum(math.comb(i, j) * (-h) ** j * s[j] for j in range(1, i + 1)) for i in range(m - 1)]
        tables.append((phi, phim, psi, psim))
    return tables


def _point_runs(op, grid, z):
    left, right = _far_indices(grid, z)
    runs_r = [_kernel_run(op.m, op.h, lam, z, right, 1) for lam in op.roots]
    runs_l = [_kernel_run(op.m, op.h, lam, z, left, -1) for lam in op.roots]
    return left, right, runs_l, runs_r


def rz_coeffs(m, z):
    """R with every moment replaced by z^a: the polynomial part of G_m(z - x) beyond Q."""
    return r_coeffs(m, [z**a for a in range(2 * m - 2)])


def correction_system(op, grid, z):
    """Matrix and right-hand side for the corrections (r~^-, r~^+).

    D_m * u_m = 0 at -b and N + b for b = 1..m-1 reads
    sum_k (A_k/lam_k) lam_k^b X_k = 0; the matrix (A_k/lam_k) lam_k^b is
    invertible, so each X_k vanishes separately.  Rows are ordered
    (left, root k) then (right, root k).
    """
    m, N = grid.m, grid.N
    n = m - 1
    left, right, runs_l, runs_r = _point_runs(op, grid, z)
    mat = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs = np.zeros(2 * n, dtype=complex)
    for k, (lam, (phi, phim, psi, psim)) in enumerate(zip(op.roots, _root_tables(op))):
        lamN = lam**N
        mat[k, :n] = phi
        mat[k, n:] = [-lamN * v for v in psi]
        rhs[k] = lam**right * runs_r[k]
        mat[n + k, :n] = [lamN * v for v in phim]
        mat[n + k, n:] = [-v for v in psim]
        rhs[n + k] = -(lam ** (N - left)) * runs_l[k]
    return mat, rhs


def _stable_tail(op, grid, z):
    m, N = grid.m, grid.N
    n = m - 1
    mat, rhs = correction_system(op, grid, z)
    try:
        factors = lu_factor(mat)
    except SingularSystem as exc:
        raise SingularBoundarySystem(str(exc)) from exc
    sol = lu_solve(factors, rhs)
    sol = sol + lu_solve(factors, rhs - mat @ sol)
    sol = _as_real(sol, "boundary corrections")
    corr_minus, corr_plus = tuple(map(float, sol[:n])), tuple(map(float, sol[n:]))
    rz = rz_coeffs(m, z)
    r_minus = tuple(a + b for a, b in zip(rz, corr_minus))
    r_plus = tuple(b - a for a, b in zip(rz, corr_plus))
    a_minus = math.exp(z) / 4 - corr_minus[0]
    a_plus = -math.exp(z) / 4 - math.e * math.fsum(corr_plus)
    q = q_coeffs(m, z)
    M, Nk = _tail_constants(op, N, z, q, r_minus, r_plus, a_minus, a_plus)
    return BoundaryTail(float(z), tuple(q), r_minus, r_plus, a_minus, a_plus, M, Nk, corr_minus, corr_plus)


def boundary_systems(op, grid, z, method="stable"):
    """Solve for the boundary unknowns of the continuation at point z.

    ``method="stable"`` (default) solves for the small corrections;
    ``method="printed"`` solves the closed-form system of ``boundary_matrix``.
    """
    if grid.m < 2:
        a = math.exp(z) / 4
        return BoundaryTail(float(z), (), (), (), a, -a, (), ())
    if method == "stable":
        return _stable_tail(op, grid, z)
    if method == "printed":
        return _printed_tail(op, grid, z)
    raise ValueError(f"unknown method {method!r}")


def _corrections(grid, tail):
    if tail.corr_minus is not None:
        return tail.corr_minus, tail.corr_plus
    rz = rz_coeffs(grid.m, tail.z)
    return (
        tuple(r - a for r, a in zip(tail.r_minus, rz)),
        tuple(r + a for r, a in zip(tail.r_plus, rz)),
    )


def coeffs_general(op, grid, tail, z):
    """Optimal coefficients for m >= 2 as D_m * u_m, without cancellation.

    C_b p = (point part) + (left correction) + (right correction), where the
    point part is the convolution of D_m with G_m(z - h g) reduced to the
    nodes on the far side of z from b.
    """
    m, N, h = grid.m, grid.N, grid.h
    if m < 2:
        raise ValueError("coeffs_general requires m >= 2")
    eh2 = 2 * math.exp(h)
    cm, cp = _corrections(grid, tail)
    left, right, runs_l, runs_r = _point_runs(op, grid, z)
    tables = _root_tables(op)
    ws = [a / l for a, l in zip(op.amps, op.roots)]
    Lk = [sum(c * v for c, v in zip(cm, t[1])) for t in tables]
    Rk = [sum(c * v for c, v in zip(cp, t[2])) for t in tables]
    ell = -cm[0] * math.expm1(h) + sum(c * (-h) ** i for i, c in enumerate(cm) if i)
    rho = sum(c * ((1 + h) ** i - 1 - math.expm1(-h)) for i, c in enumerate(cp))
    out = np.empty(N + 1, dtype=complex)
    for b in range(N + 1):
        if b <= left:
            d = right - b
            acc = sum(w * lam**d * S for w, lam, S in zip(ws, op.roots, runs_r))
            if d == 1:
                acc -= eh2 * odd_kernel(m, h * right - z)
        else:
            d = b - left
            acc = sum(w * lam**d * S for w, lam, S in zip(ws, op.roots, runs_l))
            if d == 1:
                acc -= eh2 * odd_kernel(m, z - h * left)
        acc += sum(w * (lam**b * L + lam ** (N - b) * R) for w, lam, L, R in zip(ws, op.roots, Lk, Rk))
        if b == 0:
            acc -= eh2 * ell
        if b == N:
            acc -= eh2 * rho
        out[b] = acc / op.p
    coeffs = _as_real(out, "coefficients")
    return CoefficientVector(float(z), coeffs, np.array(tail.lagrange_poly), tail.d_lag, "explicit")


# -- coefficients --------------------------------------------------------------


def coeffs_m1(grid, z):
    """Closed-form optimal coefficients for m = 1."""
    if grid.m != 1:
        raise ValueError("coeffs_m1 requires m = 1")
    node = grid.node_index(z)
    if node is not None:
        # the exponential pairs cancel only to rounding, so return the exact unit vector
        c = np.zeros(grid.N + 1)
        c[node] = 1.0
        return CoefficientVector(node * grid.h, c, np.array([]), 0.0, "explicit")
    h = grid.h
    b = np.arange(grid.N + 1)
    hb = h * b
    e = np.exp
    sg = np.sign
    c = (
        sg(z - hb - h) * (e(hb + 2 * h - z) - e(z - hb))
        + sg(z - hb + h) * (e(hb - z) - e(z - hb + 2 * h))
        + (1 + math.exp(2 * h)) * sg(z - hb) * (e(z - hb) - e(hb - z))
    ) / (2 * (1 - math.exp(2 * h)))
    return CoefficientVector(float(z), c, np.array([]), 0.0, "explicit")


def coeffs_from_displays(op, grid, tail, z):
    """Coefficients for m >= 2 from the tail constants M_k, N_k, summed term by term.

    Loses roughly four digits against ``coeffs_general`` for m >= 3.
    """
    m, N, h = grid.m, grid.N, grid.h
    if m < 2:
        raise ValueError("coeffs_from_displays requires m >= 2")
    eh = math.exp(h)
    G = green_kernel(m, z - h * np.arange(N + 1))
    u = {b: G[b] for b in range(N + 1)}
    u[-1] = continuation(m, N, tail, -1)
    u[N + 1] = continuation(m, N, tail, N + 1)
    # 2C u(b) + sum_k (A_k/lam_k) u(b) is taken as one term (the D_m(0) bracket)
    center = center_bracket(op)
    out = np.empty(N + 1, dtype=complex)
    gam = np.arange(N + 1)
    for b in range(N + 1):
        acc = center * u[b] - 2 * eh * (u[b - 1] + u[b + 1])
        for lam, amp, Mk, Nk in zip(op.roots, op.amps, tail.M, tail.Nk):
            dist = np.abs(b - gam)
            weights = np.where(dist > 0, np.power(complex(lam), dist), 0.0)
            acc += amp / lam * (np.sum(weights * G) + lam**b * Mk + lam ** (N - b) * Nk)
        out[b] = acc / op.p
    coeffs = _as_real(out, "coefficients")
    return CoefficientVector(float(z), coeffs, np.array(tail.lagrange_poly), tail.d_lag, "explicit")


def _m2_closed_form(grid, z):
    """(coefficients, r0^-, r0^+, a^-, a^+) for m = 2 with everything written out."""
    if grid.m != 2:
        raise ValueError("the m = 2 closed form requires m = 2")
    N, h = grid.N, grid.h
    E, eh, e2h = math.e, math.exp(h), math.exp(2 * h)

    def G2(x):
        return _sgn(x) / 2 * (math.sinh(x) - x)

    p = 1 - e2h + 2 * h * eh
    lam = (h * (e2h + 1) - e2h + 1 - (eh - 1) * math.sqrt(h * h * (eh + 1) ** 2 + 2 * h * (1 - e2h))) / p
    C = 1 + 2 * eh + e2h - eh * (lam**2 + 1) / lam
    A1 = 2 * (lam - 1) * (lam * (e2h + 1) - eh * (lam**2 + 1)) / (lam + 1)

    geo = lam / (1 - lam)  # sum lam^g
    geo_g = lam / (1 - lam) ** 2  # sum g lam^g
    geo_eh = lam * eh / (1 - lam * eh)  # sum lam^g e^{hg}
    geo_emh = lam / (eh - lam)  # sum lam^g e^{-hg}
    sinh_sum = lam * math.sinh(h) / (lam**2 + 1 - 2 * lam * math.cosh(h))

    B10m = 2 * C * (1 - eh) - 2 * eh * (1 - e2h) + A1 / lam**2 * (geo - geo_eh)
    B10p = A1 * lam ** (N + 1) * (eh - 1) / ((1 - lam) * (eh - lam))
    A10m = A1 * lam**N * (geo - geo_eh)
    A10p = 2 * C * (1 - 1 / eh) - 2 * eh * (1 - 1 / e2h) + A1 / lam**2 * (geo - geo_emh)

    Gz, Gz1 = G2(z), G2(z - 1)
    nodes = [G2(z - h * g) for g in range(N + 1)]
    T1 = -(math.exp(-z) * (C * math.sinh(h) - eh * math.sinh(2 * h)) + Gz * (2 * C * eh - 2 * eh * (1 + e2h)) - h * (C - 2 * eh))
    T1 -= A1 / lam * (
        sum(lam ** (g + 1) * nodes[g] for g in range(N + 1))
        + (math.exp(-z) / 2 * sinh_sum + Gz * geo_eh - h / 2 * geo_g) / lam
        + lam ** (N + 1)
        * (
            math.exp(1 - z) * lam * math.sinh(h) / (2 * (lam**2 + 1 - 2 * lam * math.cosh(h)))
            + lam * Gz1 / (eh - lam)
            + 0.5 * (lam * (1 - eh) / ((eh - lam) * (1 - lam)) - lam * h / (1 - lam) ** 2)
        )
    )
    S1 = -(
        math.exp(1 - z) * (C * math.sinh(h) - eh * math.sinh(2 * h))
        + Gz1 * (2 * C / eh - 2 * eh * (1 + 1 / e2h))
        + C * (1 / eh - 1 - h)
        - eh * (1 / e2h - 1 - 2 * h)
    )
    S1 -= A1 / lam * (
        sum(lam ** (N - g + 1) * nodes[g] for g in range(N + 1))
        + (math.exp(1 - z) / 2 * sinh_sum + Gz1 * geo_emh + 0.5 * (geo_emh - geo - h * geo_g)) / lam
        + lam ** (N + 1)
        * (
            math.exp(-z) * lam * math.sinh(h) / (2 * (lam**2 + 1 - 2 * lam * math.cosh(h)))
            + lam * eh * Gz / (1 - eh * lam)
            - lam * h / (2 * (1 - lam) ** 2)
        )
    )
    det = B10m * A10p - B10p * A10m
    r0m = (T1 * A10p - S1 * B10p) / det
    r0p = (S1 * B10m - T1 * A10m) / det
    am = Gz + math.exp(-z) / 4 - r0m
    ap = E * (Gz1 - math.exp(1 - z) / 4 - r0p + 0.5)
    M1 = lam * math.exp(-z) / (4 * (lam - eh)) + am * lam * eh / (1 - lam * eh) - h * lam / (2 * (1 - lam) ** 2) + r0m * lam / (1 - lam)
    N1 = (
        lam * math.exp(1 - z + h) / (4 * (1 - lam * eh))
        + ap * lam / (E * (eh - lam))
        - h * lam / (2 * (1 - lam) ** 2)
        - lam / (2 * (1 - lam))
        + r0p * lam / (1 - lam)
    )

    def lam_sum(b):
        return sum(lam ** abs(b - g) * nodes[g] for g in range(N + 1))

    c = np.empty(N + 1)
    c[0] = (
        2 * C * Gz
        - 2 * eh * (G2(z - h) - math.exp(-h - z) / 4 + am * eh - h / 2 + r0m)
        + A1 / lam * (lam_sum(0) + M1 + lam**N * N1)
    ) / p
    for b in range(1, N):
        c[b] = (
            2 * C * G2(z - h * b)
            - 2 * eh * (G2(z - h * (b - 1)) + G2(z - h * (b + 1)))
            + A1 / lam * (lam_sum(b) + lam**b * M1 + lam ** (N - b) * N1)
        ) / p
    c[N] = (
        2 * C * Gz1
        - 2 * eh * (G2(z - 1 + h) + math.exp(1 + h) / (4 * math.exp(z)) + ap / math.exp(1 + h) - (1 + h) / 2 + r0p)
        + A1 / lam * (lam_sum(N) + lam**N * M1 + N1)
    ) / p
    return c, r0m, r0p, am, ap


def m2_boundary_values(grid, z):
    """r0^-, r0^+, a^-, a^+ from the m = 2 closed form."""
    return _m2_closed_form(grid, z)[1:]


def coeffs_m2_corollary(grid, z):
    """Optimal coefficients for m = 2 written out with a single stable root."""
    c, r0m, r0p, am, ap = _m2_closed_form(grid, z)
    return CoefficientVector(float(z), c, np.array([0.5 * (r0m + r0p)]), 0.5 * (am + ap), "corollary")


def optimal_coefficients(grid, z):
    """Explicit optimal coefficients at z for any admissible grid."""
    if not (0.0 <= z <= 1.0):
        raise ValueError(f"z must lie in [0, 1], got {z!r}")
    z = grid.snap(z)
    if grid.m == 1:
        return coeffs_m1(grid, z)
    op = operator_for(grid.m, grid.N)
    tail = boundary_systems(op, grid, z)
    return coeffs_general(op, grid, tail, z)


def tail_from_solution(grid, cv):
    """Boundary tail implied by a solved Lagrange system (p_a, d and the moments)."""
    m, h = grid.m, grid.h
    x = grid.nodes
    z = cv.z
    moments = [math.fsum(cv.coeffs * x**a) for a in range(2 * m)]
    D = 0.25 * math.fsum(cv.coeffs * np.exp(x))
    if m == 1:
        return BoundaryTail(z, (), (), (), cv.lagrange_exp + D, cv.lagrange_exp - D, (), ())
    r = r_coeffs(m, moments)
    p = list(cv.lagrange_poly)
    r_minus = tuple(pi + ri for pi, ri in zip(p, r))
    r_plus = tuple(pi - ri for pi, ri in zip(p, r))
    q = q_coeffs(m, z)
    op = operator_for(m, grid.N)
    a_minus, a_plus = cv.lagrange_exp + D, cv.lagrange_exp - D
    M, Nk = _tail_constants(op, grid.N, z, q, r_minus, r_plus, a_minus, a_plus)
    return BoundaryTail(z, tuple(q), r_minus, r_plus, a_minus, a_plus, M, Nk)
