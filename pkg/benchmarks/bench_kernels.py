"""Time the numba kernels against their vectorised numpy twins.

    python benchmarks/bench_kernels.py [--repeat 20] [--n 60]

Both families come from ``gradqem._kernels``. With GRADQEM_NUMBA=0 (or no
numba installed) the loop kernels are plain Python, so that column reads "n/a".
First calls are made outside the timing loop so JIT compilation is excluded.
"""
import argparse
import time

import numpy as np

from gradqem import _kernels as K


def _cases(n, rng):
    a = rng.standard_normal((n, n)) + n * np.eye(n)
    s = rng.standard_normal((n, n))
    s = s + s.T
    f = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    x = np.cos(np.pi * np.arange(n) / (n - 1))[::-1].copy()
    b = rng.standard_normal((n, 3))

    def lu_args():
        return (a.copy(),)

    def solve_args(kern):
        lu = a.copy()
        perm, _, _ = kern["lu_inplace"](lu)
        return lu, perm, b.copy()

    def tql_args(kern):
        d, e, q = kern["tridiagonalize"](s.copy())
        return d.copy(), e.copy(), q.copy(), 60

    return {
        "lu_inplace": lambda kern: lu_args(),
        "lu_solve": solve_args,
        "tridiagonalize": lambda kern: (s.copy(),),
        "tql2": tql_args,
        "gll_newton": lambda kern: (n, 1e-15, 100),
        "lagrange_first": lambda kern: (x,),
        "det_mant_exp": lambda kern: (f.copy(),),
    }


def _time(fn, make_args, kern, repeat):
    fn(*make_args(kern))          # warm-up / compile
    best = np.inf
    for _ in range(repeat):
        args = make_args(kern)
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--n", type=int, default=60, help="matrix order / node count")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    cases = _cases(args.n, rng)
    print("kernel            numba [us]   numpy [us]   speedup")
    for name, make in cases.items():
        t_np = _time(K.NUMPY_KERNELS[name], make, K.NUMPY_KERNELS, args.repeat)
        if K.HAS_NUMBA:
            t_nb = _time(K.LOOP_KERNELS[name], make, K.LOOP_KERNELS, args.repeat)
            print("%-16s %11.1f %12.1f %9.2fx" % (name, 1e6 * t_nb, 1e6 * t_np, t_np / t_nb))
        else:
            print("%-16s %11s %12.1f %10s" % (name, "n/a", 1e6 * t_np, "-"))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
