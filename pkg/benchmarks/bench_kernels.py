"""Benchmark the compiled kernels against the NumPy fallback.

Runs the four hot kernels (linear forward/backward, relu pair) on
training-shaped batches and reports per-call times for both backends.

    python3 benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from tcr import _kernels_py

try:
    from tcr import _kernels
except ImportError:
    _kernels = None

SHAPES = [
    ("batch32 2->64", 32, 2, 64),
    ("batch32 64->64", 32, 64, 64),
    ("batch32 64->3", 32, 64, 3),
    ("batch256 64->64", 256, 64, 64),
    ("full-set 1125 2->64", 1125, 2, 64),
]


def bench(fn, args, repeats):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    backends = [("numpy", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled backend unavailable; benchmarking the fallback only")

    rng = np.random.default_rng(0)
    header = f"{'kernel':<18} {'shape':<22}" + "".join(
        f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for label, n, din, dout in SHAPES:
        x = rng.normal(size=(n, din))
        W = rng.normal(size=(dout, din))
        b = rng.normal(size=dout)
        z = rng.normal(size=(n, dout))
        g = rng.normal(size=(n, dout))
        kernels = [
            ("linear_forward", lambda m: (m.linear_forward, (x, W, b))),
            ("relu", lambda m: (m.relu, (z,))),
            ("relu_backward", lambda m: (m.relu_backward, (g, z))),
            ("linear_backward", lambda m: (m.linear_backward, (g, x, W))),
        ]
        for kname, pick in kernels:
            times = []
            for _, mod in backends:
                fn, fargs = pick(mod)
                times.append(bench(fn, fargs, args.repeats))
            row = f"{kname:<18} {label:<22}" + "".join(
                f"{t * 1e6:>10.1f}us" for t in times)
            if len(times) == 2:
                row += f"{times[0] / times[1]:>9.2f}x"
            print(row)


if __name__ == "__main__":
    main()
