"""Optional numba acceleration for the two pointwise hot kernels.

The heavy lifting elsewhere (dense solves, FFTs) already runs in BLAS/FFT
C code, so only genuinely loop-bound kernels live here:

* ``legendre_table``  - Legendre values/derivatives by upward recurrence,
* ``convective_product`` - the pointwise quadratic term (grad v) u + (grad u)^T v
  on the padded physical grid, fused to avoid nine temporaries.

Both carry a pure-numpy fallback.  Selection: numba is used when importable
unless the environment variable ``NSAB_FORCE_FALLBACK`` is set to a non-empty
value other than ``0``.  ``benchmarks/bench_kernels.py`` compares the paths.
"""

import os

import numpy as np

_force_fallback = os.environ.get("NSAB_FORCE_FALLBACK", "0") not in ("", "0")

try:  # pragma: no cover - exercised via NSAB_FORCE_FALLBACK in CI
    if _force_fallback:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


def _legendre_table_numpy(x, nmax, dmax):
    """Table T[d, n, j] = d-th derivative of P_n at x[j], n <= nmax, d <= dmax.

    Recurrence (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}, differentiated d
    times: (n+1) P_{n+1}^(d) = (2n+1) (x P_n^(d) + d P_n^(d-1)) - n P_{n-1}^(d).
    """
    x = np.asarray(x, dtype=np.float64)
    T = np.zeros((dmax + 1, nmax + 1, x.size))
    T[0, 0] = 1.0
    if nmax >= 1:
        T[0, 1] = x
        if dmax >= 1:
            T[1, 1] = 1.0
    for n in range(1, nmax):
        for d in range(dmax + 1):
            lower = d * T[d - 1, n] if d > 0 else 0.0
            T[d, n + 1] = ((2 * n + 1) * (x * T[d, n] + lower) - n * T[d, n - 1]) / (n + 1)
    return T


@njit(cache=True)
def _legendre_table_numba(x, nmax, dmax):  # pragma: no cover - numba path
    npts = x.shape[0]
    T = np.zeros((dmax + 1, nmax + 1, npts))
    for j in range(npts):
        T[0, 0, j] = 1.0
    if nmax >= 1:
        for j in range(npts):
            T[0, 1, j] = x[j]
        if dmax >= 1:
            for j in range(npts):
                T[1, 1, j] = 1.0
    for n in range(1, nmax):
        for d in range(dmax + 1):
            for j in range(npts):
                low = d * T[d - 1, n, j] if d > 0 else 0.0
                T[d, n + 1, j] = ((2 * n + 1) * (x[j] * T[d, n, j] + low)
                                  - n * T[d, n - 1, j]) / (n + 1)
    return T


def _convective_product_numpy(u, gu, v, gv):
    """F_i = sum_j (gv)_{ij} u_j + (gu)_{ji} v_j, pointwise over the grid.

    u, v: (3, ...) real arrays; gu, gv: (3, 3, ...) with (grad u)_{ij} = d_j u_i.
    """
    return np.einsum("ij...,j...->i...", gv, u) + np.einsum("ji...,j...->i...", gu, v)


@njit(cache=True)
def _convective_product_numba(u, gu, v, gv):  # pragma: no cover - numba path
    n = u.shape[1]
    F = np.zeros_like(u)
    for i in range(3):
        for j in range(3):
            for q in range(n):
                F[i, q] += gv[i, j, q] * u[j, q] + gu[j, i, q] * v[j, q]
    return F


def legendre_table(x, nmax, dmax):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if HAVE_NUMBA:
        return _legendre_table_numba(x, nmax, dmax)
    return _legendre_table_numpy(x, nmax, dmax)


def convective_product(u, gu, v, gv):
    if HAVE_NUMBA:
        shape = u.shape
        flat = _convective_product_numba(
            np.ascontiguousarray(u.reshape(3, -1)),
            np.ascontiguousarray(gu.reshape(3, 3, -1)),
            np.ascontiguousarray(v.reshape(3, -1)),
            np.ascontiguousarray(gv.reshape(3, 3, -1)),
        )
        return flat.reshape(shape)
    return _convective_product_numpy(u, gu, v, gv)
