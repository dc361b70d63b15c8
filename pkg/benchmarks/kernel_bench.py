"""Compare the compiled kernels against the pure NumPy twins.

Usage: python benchmarks/kernel_bench.py [--sizes 12,50,200,1000] [--repeats 2000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from insightloop.kernels import _pure

try:
    from insightloop.kernels import _native
except ImportError:
    _native = None


def time_kernel(fn, args_list, repeats: int) -> float:
    started = time.perf_counter()
    for _ in range(repeats):
        for args in args_list:
            fn(*args)
    return (time.perf_counter() - started) / (repeats * len(args_list))


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="12,50,200,1000")
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    if _native is None:
        print("compiled kernels unavailable; nothing to compare")
        return

    print(f"{'kernel':18s} {'n':>6s} {'pure (us)':>12s} {'native (us)':>12s} "
          f"{'speedup':>8s}")
    for n in sizes:
        data = [(rng.normal(size=n),) for _ in range(8)]
        pairs = [(rng.normal(size=n), rng.normal(size=n)) for _ in range(8)]
        for name, pure_fn, native_fn, payload in (
            ("changepoint_scan", _pure.changepoint_scan, _native.changepoint_scan,
             data),
            ("acf_max", _pure.acf_max, _native.acf_max, data),
            ("ols_line", _pure.ols_line, _native.ols_line, data),
            ("pearson_r", _pure.pearson_r, _native.pearson_r, pairs),
        ):
            t_pure = time_kernel(pure_fn, payload, args.repeats)
            t_native = time_kernel(native_fn, payload, args.repeats)
            print(f"{name:18s} {n:6d} {t_pure * 1e6:12.2f} {t_native * 1e6:12.2f} "
                  f"{t_pure / t_native:7.1f}x")


if __name__ == "__main__":
    main()
