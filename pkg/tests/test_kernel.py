import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from w2interp.kernel import SERIES_CUTOFF, delta_powers, euler_frobenius, green_kernel, odd_kernel, power_series_sum

mp.mp.dps = 40


def mp_kernel(m, x):
    x = mp.mpf(x)
    poly = mp.fsum(x ** (2 * k - 1) / mp.factorial(2 * k - 1) for k in range(1, m))
    return mp.sign(x) / 2 * (mp.sinh(x) - poly)


def test_kernel_zero_at_origin():
    assert green_kernel(2, 0.0) == 0.0


def test_kernel_m2_half():
    assert green_kernel(2, 0.5) == pytest.approx((math.sinh(0.5) - 0.5) / 2, rel=1e-15)
    # frozen from a 30-digit evaluation of the closed form
    assert green_kernel(2, 0.5) == pytest.approx(0.010547652746873683, rel=1e-15)


def test_kernel_m1_one():
    assert green_kernel(1, 1.0) == pytest.approx(0.5876005968, abs=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("x", [1e-3, 0.05, 0.1, 0.5, 1.0, 2.5, SERIES_CUTOFF - 1e-9, SERIES_CUTOFF, 6.0, 15.0])
def test_kernel_matches_high_precision(m, x):
    ref = float(mp_kernel(m, x))
    assert green_kernel(m, x) == pytest.approx(ref, rel=2e-15)
    assert green_kernel(m, -x) == pytest.approx(ref, rel=2e-15)


def test_kernel_array_input():
    xs = np.array([[-1.0, 0.0], [0.3, 2.0]])
    out = green_kernel(3, xs)
    assert out.shape == xs.shape
    assert out[0, 0] == green_kernel(3, 1.0)


def test_kernel_rejects_bad_order():
    with pytest.raises(ValueError):
        green_kernel(0, 1.0)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_kernel_small_argument_order(m):
    ratios = [green_kernel(m, x) / x ** (2 * m - 1) for x in (1e-1, 1e-2, 1e-3)]
    limit = 0.5 / math.factorial(2 * m - 1)
    assert all(abs(r - limit) < limit for r in ratios)
    assert ratios[-1] == pytest.approx(limit, rel=1e-5)


@given(st.integers(1, 6), st.floats(-20, 20, allow_nan=False))
def test_kernel_even(m, x):
    assert green_kernel(m, x) == green_kernel(m, -x)


@given(st.integers(1, 6), st.floats(-20, 20, allow_nan=False))
def test_odd_kernel_is_twice_signed_kernel(m, x):
    assert odd_kernel(m, x) == pytest.approx(2 * np.sign(x) * green_kernel(m, x), rel=1e-15, abs=0)


@pytest.mark.parametrize("k, coeffs", [(0, [1]), (1, [1, 1]), (2, [1, 4, 1]), (3, [1, 11, 11, 1])])
def test_euler_frobenius_values(k, coeffs):
    assert euler_frobenius(k) == coeffs


@pytest.mark.parametrize("k", range(8))
def test_euler_frobenius_generating_identity(k):
    coeffs = euler_frobenius(k)
    for lam in (0.2, -0.5, 0.7):
        brute = math.fsum(j ** (k + 1) * lam**j for j in range(1, 2000))
        closed = lam * sum(c * lam**i for i, c in enumerate(coeffs)) / (1 - lam) ** (k + 2)
        assert closed == pytest.approx(brute, rel=1e-12)


@pytest.mark.parametrize("k", range(10))
def test_euler_frobenius_palindromic_and_sum(k):
    c = euler_frobenius(k)
    assert len(c) == k + 1
    assert c == c[::-1]
    assert sum(c) == math.factorial(k + 1)
    assert all(v > 0 for v in c)


def test_euler_frobenius_rejects_negative():
    with pytest.raises(ValueError):
        euler_frobenius(-1)


@pytest.mark.parametrize("nu, j, value", [(3, 2, 0), (1, 1, 1), (2, 3, 6), (0, 0, 1)])
def test_delta_powers_values(nu, j, value):
    assert delta_powers(nu, j) == value


@given(st.integers(0, 12), st.integers(0, 12))
def test_delta_powers_structure(nu, j):
    if nu > j:
        assert delta_powers(nu, j) == 0
    if nu == j:
        assert delta_powers(nu, j) == math.factorial(j)


@pytest.mark.parametrize("i", range(6))
@pytest.mark.parametrize("lam", [0.3, -0.45, 0.2 + 0.3j])
def test_power_series_sum(i, lam):
    brute = sum(g**i * lam**g for g in range(1, 400))
    assert abs(power_series_sum(lam, i) - brute) < 1e-12 * max(1.0, abs(brute))
