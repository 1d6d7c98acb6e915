"""Truthful database responses and exhaustive decision-tree enumeration."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable

from .core import Interval
from .strategies import (
    AxisQuery,
    Seed,
    StrategySpec,
    Transcript,
    _COROUTINES,
    _coerce_seed,
    encode_point,
    encode_query,
    replay,
    restrict,
)

DEFAULT_BUDGET = 2**22


class BudgetExceeded(RuntimeError):
    pass


def respond(v, q) -> int:
    if isinstance(q, AxisQuery):
        return int(v[q.axis] >= q.offset)
    return int(v >= q)


def run_episode(spec: StrategySpec, v, seed=1) -> tuple:
    """Play one episode against a truthful database holding ``v``."""
    seed = _coerce_seed(spec, seed)
    gen = _COROUTINES[spec.family](spec, seed)
    queries, responses = [], []
    try:
        q = next(gen)
        while True:
            r = respond(v, q)
            queries.append(q)
            responses.append(r)
            q = gen.send(r)
    except StopIteration as stop:
        est = stop.value
    return Transcript(tuple(queries), tuple(responses), seed), est


@dataclass(frozen=True)
class Leaf:
    seed: Seed
    responses: tuple
    consistency: object  # Interval, or a tuple of per-axis Intervals
    transcript: Transcript
    estimate: object

    @property
    def queries(self) -> tuple:
        return self.transcript.queries

    def to_json(self) -> dict:
        c = self.consistency
        return {
            "seed": self.seed.value,
            "responses": list(self.responses),
            "consistency": c.to_json() if isinstance(c, Interval) else [p.to_json() for p in c],
            "queries": [encode_query(q) for q in self.queries],
            "estimate": encode_point(self.estimate),
        }


def _region_key(region):
    if isinstance(region, Interval):
        return (region.lo,)
    return tuple(p.lo for p in region)


def _leaves_for_seed(spec: StrategySpec, seed: Seed) -> list:
    n = spec.n_queries
    out = []
    stack = [()]
    while stack:
        responses = stack.pop()
        queries, pending, region = replay(spec, responses, seed)
        if len(responses) == n:
            t = Transcript(tuple(queries), responses, seed)
            out.append(Leaf(seed, responses, region, t, pending))
            continue
        for r in (1, 0):
            if restrict(region, pending, r) is not None:
                stack.append(responses + (r,))
    out.sort(key=lambda leaf: _region_key(leaf.consistency))
    return out


def _leaves_chunk(args):
    spec, seeds = args
    return [leaf for s in seeds for leaf in _leaves_for_seed(spec, s)]


def check_budget(spec: StrategySpec, budget: int = DEFAULT_BUDGET) -> None:
    size = spec.seed_space * 2**spec.n_queries
    if size > budget:
        raise BudgetExceeded(
            f"budget-exceeded: {spec.seed_space} seeds x 2^{spec.n_queries} paths = {size} > {budget}"
        )


def enumerate_leaves(spec: StrategySpec, budget: int = DEFAULT_BUDGET, workers: int = 1) -> list:
    """Every (seed, response path) that some true value realizes.

    For each seed the consistency regions of its leaves tile the unit
    interval (unit cube when d > 1).
    """
    check_budget(spec, budget)
    seeds = list(spec.seeds())
    if workers <= 1 or len(seeds) == 1:
        return _leaves_chunk((spec, seeds))
    chunks = [seeds[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_leaves_chunk, [(spec, c) for c in chunks]))
    merged = [leaf for part in parts for leaf in part]
    merged.sort(key=lambda leaf: (leaf.seed.value, _region_key(leaf.consistency)))
    return merged


def group_by_queries(leaves: Iterable[Leaf]) -> dict:
    groups: dict = {}
    for leaf in leaves:
        groups.setdefault(leaf.queries, []).append(leaf)
    return groups


def find_leaf(leaves: Iterable[Leaf], v, seed) -> Leaf:
    sv = seed.value if isinstance(seed, Seed) else int(seed)
    for leaf in leaves:
        if leaf.seed.value != sv:
            continue
        c = leaf.consistency
        if isinstance(c, Interval):
            if v in c:
                return leaf
        elif all(x in p for x, p in zip(v, c)):
            return leaf
    raise LookupError(f"no leaf holds {v} under seed {sv}")


def write_leaves_jsonl(leaves: Iterable[Leaf], fh: IO[str]) -> int:
    n = 0
    for leaf in leaves:
        fh.write(json.dumps(leaf.to_json()) + "\n")
        n += 1
    return n
