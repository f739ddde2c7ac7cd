"""Timing comparison of the compiled kernels against the pure-Python ones.

Runs OMP, IHT, and the hard-threshold primitive on a few problem sizes
with both backends and prints a table of median wall times. Usage:

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import statistics
import time

import numpy as np

from csbench import Amplitude, build_matrix, generate_sparse_signal, measure
from csbench.kernels import pyref

try:
    from csbench.kernels import _core
except ImportError:
    _core = None


def planted(m, n, k, seed):
    mat = build_matrix("gaussian", m, n, seed=seed)
    sig = generate_sparse_signal(n, k, Amplitude.UNIT_GAUSSIAN, seed=seed + 1)
    return mat.entries, measure(mat, sig).y


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases():
    for m, n, k in ((32, 64, 4), (128, 256, 8), (256, 1024, 16)):
        a, y = planted(m, n, k, seed=7)
        yield (f"omp {m}x{n} k={k}",
               lambda mod, a=a, y=y, k=k:
               mod.omp_kernel(a, y, k, 1e-12, 4 * k))
        yield (f"iht {m}x{n} k={k}",
               lambda mod, a=a, y=y, k=k:
               mod.iht_kernel(a, y, k, False, 1e-12, 500))
    # the compiled threshold scans k times (O(nk)); the python one sorts
    # (O(n log n)), so the crossover against k is worth seeing
    v = np.random.default_rng(3).normal(size=100_000)
    for k in (16, 2048):
        yield (f"hard_threshold n=100000 k={k}",
               lambda mod, v=v, k=k: mod.hard_threshold(v, k))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=9,
                        help="timing repeats per case (default %(default)s)")
    args = parser.parse_args()

    if _core is None:
        print("compiled backend not built; timing the python backend only")
    header = f"{'case':34} {'python':>10}" + \
        (f" {'cython':>10} {'speedup':>8}" if _core else "")
    print(header)
    print("-" * len(header))
    for name, call in cases():
        call(pyref)  # warm caches before timing
        py = median_time(lambda: call(pyref), args.repeats)
        line = f"{name:34} {py * 1e3:9.3f}ms"
        if _core is not None:
            call(_core)
            cy = median_time(lambda: call(_core), args.repeats)
            line += f" {cy * 1e3:9.3f}ms {py / cy:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
