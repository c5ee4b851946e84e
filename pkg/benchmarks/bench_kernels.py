"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20]

Each kernel is checked for bit-identical output before it is timed.
"""

import argparse
import timeit

import numpy as np

from cmux import _kernels_py

try:
    from cmux import _kernels
except ImportError:
    _kernels = None

SIZES = [(20, 672), (32, 2080), (100, 20000)]


def cases(M, omega):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((M, omega)) + 1j * rng.standard_normal((M, omega))
    y = rng.standard_normal(omega) + 1j * rng.standard_normal(omega)
    signs_t = np.ascontiguousarray(_kernels_py.rademacher(7, 1, omega, M).T)
    return {
        "rademacher": (7, 1, omega, M),
        "uniform01": (7, 2, M, omega),
        "modulate_sum": (x, signs_t),
        "demodulate": (y, signs_t),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
        return 1
    print(f"{'kernel':14s} {'M':>4s} {'omega':>6s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for M, omega in SIZES:
        for name, call_args in cases(M, omega).items():
            slow, fast = getattr(_kernels_py, name), getattr(_kernels, name)
            if not np.array_equal(slow(*call_args), fast(*call_args)):
                raise SystemExit(f"{name}: backends disagree")
            t_py = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat)) * 1e3
            t_cy = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:14s} {M:4d} {omega:6d} {t_py:10.3f} {t_cy:10.3f} {t_py / t_cy:8.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
