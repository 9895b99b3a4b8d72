"""Extended-precision reference computations shared by the tests."""

import mpmath as mp
import numpy as np


def mp_solve(m, N, z, dps=50):
    """The same Lagrange system solved in extended precision."""
    with mp.workdps(dps):
        z = mp.mpf(z)
        h = mp.mpf(1) / N
        x = [h * b for b in range(N + 1)]

        def G(t):
            poly = mp.fsum(t ** (2 * k - 1) / mp.factorial(2 * k - 1) for k in range(1, m))
            return mp.sign(t) / 2 * (mp.sinh(t) - poly)

        n = N + m + 1
        A = mp.zeros(n, n)
        b = mp.zeros(n, 1)
        for i in range(N + 1):
            for j in range(N + 1):
                A[i, j] = G(x[i] - x[j])
            for a in range(m - 1):
                A[i, N + 1 + a] = x[i] ** a
                A[N + 1 + a, i] = x[i] ** a
            A[i, n - 1] = mp.e ** (-x[i])
            A[n - 1, i] = mp.e ** (-x[i])
            b[i] = G(z - x[i])
        for a in range(m - 1):
            b[N + 1 + a] = z**a
        b[n - 1] = mp.e ** (-z)
        sol = mp.lu_solve(A, b)
        return np.array([float(v) for v in sol])
