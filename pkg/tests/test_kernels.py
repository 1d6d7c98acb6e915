import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from pslearn import kernels
from pslearn.oracle import run_episode
from pslearn.strategies import StrategySpec
from pslearn.verifier import build_leaf_table

F = Fraction
HAVE_CYTHON = "cython" in kernels.BACKENDS


def _ob_grid_args(spec, step, seeds):
    m, M = spec.config.side, spec.depth
    unit = math.lcm(m, spec.epsilon.denominator, step) << (M + 1)
    axis = np.arange(step, dtype=np.int64) * (unit // step)
    mesh = np.stack([a.ravel() for a in np.meshgrid(*([axis] * spec.d), indexing="ij")], axis=1)
    points = np.repeat(mesh, len(seeds), axis=0)
    seed_col = np.tile(np.asarray(seeds, dtype=np.int64), len(mesh))
    return (points, seed_col, spec.d, m, int(spec.epsilon * unit), M, unit), unit


def test_backend_registry():
    assert "python" in kernels.BACKENDS
    assert kernels.BACKEND in kernels.BACKENDS
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_pure_fallback_selected_by_environment():
    env = dict(os.environ, PSLEARN_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import pslearn.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("family,eps,delta,L,d", [("ob-d", "1/32", "1/4", 4, 2), ("ob-d", "1/8", "1/2", 4, 2), ("ob", "1/24", "1/3", 3, 1)])
def test_ob_estimates_match_exact_episodes(family, eps, delta, L, d):
    spec = StrategySpec.build(family, eps, delta, L, d=d)
    rng = np.random.default_rng(5)
    seeds = sorted(set(rng.integers(1, spec.seed_space + 1, 12).tolist()))
    args, unit = _ob_grid_args(spec, 16, seeds)
    est = kernels.ob_estimates(*args, backend="python")
    points, seed_col = args[0], args[1]
    for i in rng.choice(len(points), min(300, len(points)), replace=False):
        v = tuple(F(int(x), unit) for x in points[i])
        _, exact = run_episode(spec, v if d > 1 else v[0], int(seed_col[i]))
        exact = exact if d > 1 else (exact,)
        assert tuple(F(int(x), unit) for x in est[i]) == exact


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled extension not built")
def test_ob_estimates_backends_agree():
    spec = StrategySpec.build("ob-d", "1/32", "1/4", 4, d=2)
    args, _ = _ob_grid_args(spec, 32, list(range(1, spec.seed_space + 1, 7)))
    assert np.array_equal(kernels.ob_estimates(*args, backend="cython"), kernels.ob_estimates(*args, backend="python"))


@pytest.mark.skipif(not HAVE_CYTHON, reason="compiled extension not built")
@pytest.mark.parametrize("family,kind", [("ob", "last_query"), ("ob", "cover_midpoint"), ("rb", "best_replica")])
def test_mc_hits_backends_agree(family, kind):
    spec = StrategySpec.build(family, "1/24" if family == "ob" else "1/16", "1/3" if family == "ob" else "1/2", 3 if family == "ob" else 2)
    table = build_leaf_table(spec, kind)
    rng = np.random.default_rng(9)
    n = 40_000
    draws = (rng.integers(0, table.n_seeds, n, dtype=np.int64), rng.integers(0, table.U, n, dtype=np.int64),
             rng.integers(0, table.P, n, dtype=np.int64))
    a = kernels.mc_hits(*draws, *table.arrays(), backend="cython")
    b = kernels.mc_hits(*draws, *table.arrays(), backend="python")
    assert a == b


def test_mc_hits_hand_table():
    # one seed; leaves [0, 1/2) and [1/2, 1) estimate 1/4 and 3/4; window half-width 1/8; U = 8
    i64 = lambda *xs: np.array(xs, dtype=np.int64)
    table = (i64(0, 2), i64(0, 4), i64(0, 1, 2), i64(2, 6), i64(1, 1), 1, 8, 1)
    u = np.arange(8, dtype=np.int64)
    zeros = np.zeros(8, dtype=np.int64)
    for name in kernels.BACKENDS:
        # hits at u in {1, 2, 3} and {5, 6, 7}
        assert kernels.mc_hits(zeros, u, zeros, *table, backend=name) == 6
