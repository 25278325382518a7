"""Compare the compiled kernels against the NumPy fallback.

Run with ``python3 benchmarks/bench_kernels.py``; prints one line per kernel
with the best-of-N wall time for each backend and the speedup.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from hessquot import _kernels_py

try:
    from hessquot import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def cases(rng):
    lam = rng.normal(size=(20000, 6))
    A = rng.normal(size=(4000, 5, 5))
    S = _kernels_py.minor_sums_batch(A)
    q = 1.0  # C(3,2)/C(3,1): quotient constant for n=3, k=2, l=1
    return {
        "elem_sym_batch 20000x6": lambda k: k.elem_sym_batch(lam),
        "minor_sums_batch 4000x5x5": lambda k: k.minor_sums_batch(A),
        "sk_grad_batch 4000x5x5": lambda k: k.sk_grad_batch(A, S, 5),
        "integrate_radial euclid h=1e-4": lambda k: k.integrate_radial(0, 3, 2, 1, q, 0.0, 1.0, 1e-4, 64.0),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        if _kernels_c is None:
            print(f"{name:34s} {t_py:11.4f} {'n/a':>11s} {'n/a':>8s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_kernels_c), number=1, repeat=args.repeat))
        print(f"{name:34s} {t_py:11.4f} {t_c:11.4f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
