"""Compare the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import timeit

import numpy as np

from epicast._kernels import _pyloops

try:
    from epicast._kernels import _fastloops
except ImportError:
    _fastloops = None


def bench(label, fn, args, repeats):
    per_call = min(timeit.repeat(lambda: fn(*args), number=20,
                                 repeat=repeats)) / 20
    print(f"  {label:<12} {per_call * 1e6:10.1f} us/call")
    return per_call


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    opts = ap.parse_args()

    rng = np.random.default_rng(0)
    n = 2000
    w = rng.normal(size=n)
    arima_args = (w, np.array([0.5, -0.2]), np.array([0.3]),
                  np.array([0.1]), np.array([-0.1]), 7, 0.05, 0)
    seas = rng.normal(size=7)
    ets_args = (w, 0.3, 0.1, 0.2, 0.95, 7, 0.0, 0.0, seas, True, True)

    print(f"arima_css_innovations, n={n}, (2,1)x(1,1)_7:")
    py = bench("python", _pyloops.arima_css_innovations, arima_args,
               opts.repeats)
    if _fastloops is not None:
        cy = bench("cython", _fastloops.arima_css_innovations, arima_args,
                   opts.repeats)
        print(f"  speedup      {py / cy:10.1f}x")

    print(f"ets_smooth, n={n}, damped trend + weekly seasonal:")
    py = bench("python", _pyloops.ets_smooth, ets_args, opts.repeats)
    if _fastloops is not None:
        cy = bench("cython", _fastloops.ets_smooth, ets_args, opts.repeats)
        print(f"  speedup      {py / cy:10.1f}x")

    if _fastloops is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
