"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both workloads are run on every available backend and the outputs are
compared for equality before any timing is reported.
"""

import argparse
import math
import time

import numpy as np

from pslearn import kernels
from pslearn.strategies import Family, StrategySpec
from pslearn.verifier import build_leaf_table


def mc_workload(n: int):
    spec = StrategySpec.build(Family.OPPORTUNISTIC_BISECTION, "1/24", "1/3", 3)
    table = build_leaf_table(spec, "last_query")
    rng = np.random.default_rng(1)
    args = (
        rng.integers(0, table.n_seeds, n, dtype=np.int64),
        rng.integers(0, table.U, n, dtype=np.int64),
        rng.integers(0, table.P, n, dtype=np.int64),
        *table.arrays(),
    )
    return lambda backend: kernels.mc_hits(*args, backend=backend)


def grid_workload(step: int):
    spec = StrategySpec.build(Family.OPPORTUNISTIC_BISECTION_D, "1/32", "1/4", 4, d=2)
    m, M = spec.config.side, spec.depth
    unit = math.lcm(m, spec.epsilon.denominator, step) << (M + 1)
    axis = np.arange(step, dtype=np.int64) * (unit // step)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    seeds = np.arange(1, spec.seed_space + 1, dtype=np.int64)
    points = np.repeat(grid, len(seeds), axis=0)
    seed_col = np.tile(seeds, len(grid))
    eps = int(spec.epsilon * unit)
    return lambda backend: kernels.ob_estimates(points, seed_col, 2, m, eps, M, unit, backend=backend)


def best_of(fn, backend, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(backend)
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--mc-trials", type=int, default=1_000_000)
    ap.add_argument("--grid", type=int, default=64, help="points per axis")
    args = ap.parse_args()

    workloads = {
        f"mc_hits ({args.mc_trials} trials)": mc_workload(args.mc_trials),
        f"ob_estimates ({args.grid}^2 points x 1024 seeds)": grid_workload(args.grid),
    }
    backends = sorted(kernels.BACKENDS)
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    for name, fn in workloads.items():
        outs = [fn(b) for b in backends]
        same = all(np.array_equal(outs[0], o) for o in outs[1:])
        times = {b: best_of(fn, b, args.repeat) for b in backends}
        cells = "  ".join(f"{b}={t * 1e3:8.1f} ms" for b, t in times.items())
        ratio = ""
        if len(times) == 2:
            ratio = f"  speedup x{times['python'] / times['cython']:.1f}"
        print(f"{name:45s} {cells}{ratio}  outputs {'match' if same else 'DIFFER'}")


if __name__ == "__main__":
    main()
