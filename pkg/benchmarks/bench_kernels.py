"""Timing comparison of the numba and pure-numpy kernel paths.

The two kernels behind nsab._accel are the only loop-bound hot spots; all
other heavy work (dense eigen/LU, FFTs) is BLAS/FFT-bound either way.
Run:  python benchmarks/bench_kernels.py
The env flag NSAB_FORCE_FALLBACK=1 makes the package itself use the numpy
path; here both implementations are imported directly and timed in-process.
"""

import time

import numpy as np

from nsab._accel import (HAVE_NUMBA, _convective_product_numpy,
                         _legendre_table_numpy)

try:
    from nsab._accel import _convective_product_numba, _legendre_table_numba
except ImportError:  # pragma: no cover
    _convective_product_numba = None
    _legendre_table_numba = None


def timeit(fn, *args, repeat=20):
    fn(*args)  # warm-up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_legendre():
    x = np.linspace(-1.0, 1.0, 4096)
    nmax, dmax = 48, 5
    t_np = timeit(_legendre_table_numpy, x, nmax, dmax)
    print(f"legendre_table  numpy: {1e3 * t_np:8.3f} ms")
    if _legendre_table_numba is not None:
        t_nb = timeit(_legendre_table_numba, x, nmax, dmax)
        print(f"legendre_table  numba: {1e3 * t_nb:8.3f} ms   "
              f"(speedup x{t_np / t_nb:.2f})")


def bench_convective():
    rng = np.random.default_rng(0)
    shape = (3, 32, 32, 49)          # padded evolution grid at N=16^2, P=32
    u = rng.standard_normal(shape)
    v = rng.standard_normal(shape)
    gu = rng.standard_normal((3,) + shape)
    gv = rng.standard_normal((3,) + shape)
    t_np = timeit(_convective_product_numpy, u, gu, v, gv)
    print(f"convective_product  numpy: {1e3 * t_np:8.3f} ms")
    if _convective_product_numba is not None:
        uf = np.ascontiguousarray(u.reshape(3, -1))
        vf = np.ascontiguousarray(v.reshape(3, -1))
        guf = np.ascontiguousarray(gu.reshape(3, 3, -1))
        gvf = np.ascontiguousarray(gv.reshape(3, 3, -1))
        t_nb = timeit(_convective_product_numba, uf, guf, vf, gvf)
        print(f"convective_product  numba: {1e3 * t_nb:8.3f} ms   "
              f"(speedup x{t_np / t_nb:.2f})")
        ref = _convective_product_numpy(u, gu, v, gv)
        got = _convective_product_numba(uf, guf, vf, gvf).reshape(ref.shape)
        print(f"paths agree to {np.abs(ref - got).max():.2e}")


if __name__ == "__main__":
    print(f"numba available: {HAVE_NUMBA}")
    bench_legendre()
    bench_convective()
