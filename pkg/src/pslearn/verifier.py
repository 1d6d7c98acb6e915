"""Machine-checked verdicts for the privacy definitions and the complexity bounds."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .adversary import (
    AdversaryEstimator,
    best_replica_estimator,
    cover_midpoint_estimator,
    cover_number,
    last_query_estimator,
    linf_packing,
)
from .core import (
    Interval,
    IntervalSet,
    ProblemConfig,
    ceil_log2,
    format_rational,
    measure,
    normalize,
)
from .oracle import DEFAULT_BUDGET, Leaf, enumerate_leaves, group_by_queries
from .strategies import Family, StrategySpec, Transcript, query_count

ESTIMATOR_KINDS = ("last_query", "best_replica", "cover_midpoint")


class BoundsViolation(AssertionError):
    pass


@dataclass
class PrivacyReport:
    accuracy_ok: bool
    worst_accuracy_slack: Fraction
    min_cover_number: int
    witness_transcript: Transcript | None
    privacy_ok: bool
    n_leaves: int = 0
    n_transcripts: int = 0
    cover_method: str = "greedy"

    @property
    def ok(self) -> bool:
        return self.accuracy_ok and self.privacy_ok

    def to_json(self) -> dict:
        return {
            "accuracy_ok": self.accuracy_ok,
            "worst_accuracy_slack": format_rational(self.worst_accuracy_slack),
            "min_cover_number": self.min_cover_number,
            "witness_transcript": self.witness_transcript.to_json() if self.witness_transcript else None,
            "privacy_ok": self.privacy_ok,
            "n_leaves": self.n_leaves,
            "n_transcripts": self.n_transcripts,
            "cover_method": self.cover_method,
        }


def accuracy_slack(leaf: Leaf, epsilon) -> Fraction:
    """sup over the closed consistency region of |estimate - x|, minus epsilon/2."""
    c = leaf.consistency
    if isinstance(c, Interval):
        worst = c.sup_distance(leaf.estimate)
    else:
        worst = max(iv.sup_distance(e) for iv, e in zip(c, leaf.estimate))
    return worst - Fraction(epsilon) / 2


def transcript_cover(group: Sequence[Leaf], delta) -> int:
    """Cover number of the information set shared by ``group``.

    Exact (greedy) in one dimension; in d > 1 the size of an l-inf packing,
    which is a lower bound.
    """
    regions = [leaf.consistency for leaf in group]
    if isinstance(regions[0], Interval):
        return cover_number(normalize(regions), delta)
    return len(linf_packing(list(dict.fromkeys(regions)), delta))


def verify_private(spec: StrategySpec, config: ProblemConfig | None = None,
                   budget: int = DEFAULT_BUDGET, workers: int = 1) -> PrivacyReport:
    """Exhaustive check of the accuracy and privacy constraints.

    ``config`` supplies epsilon, delta and L for the check and defaults to the
    strategy's own parameters.
    """
    config = config or spec.config
    leaves = enumerate_leaves(spec, budget=budget, workers=workers)
    worst_leaf = max(leaves, key=lambda leaf: accuracy_slack(leaf, config.epsilon))
    worst = accuracy_slack(worst_leaf, config.epsilon)
    groups = group_by_queries(leaves)
    min_cover, min_group = None, None
    for group in groups.values():
        c = transcript_cover(group, config.delta)
        if min_cover is None or c < min_cover:
            min_cover, min_group = c, group
    privacy_ok = min_cover >= config.L
    accuracy_ok = worst <= 0
    witness = None
    if not privacy_ok:
        witness = min_group[0].transcript
    elif not accuracy_ok:
        witness = worst_leaf.transcript
    return PrivacyReport(
        accuracy_ok=accuracy_ok,
        worst_accuracy_slack=worst,
        min_cover_number=min_cover,
        witness_transcript=witness,
        privacy_ok=privacy_ok,
        n_leaves=len(leaves),
        n_transcripts=len(groups),
        cover_method="greedy" if spec.d == 1 else "linf-packing lower bound",
    )


def min_success_probability(est: AdversaryEstimator, s: IntervalSet, delta) -> Fraction:
    """inf over x in s of P(|estimate - x| <= delta/2), computed exactly.

    The success probability is constant between consecutive breakpoints
    (support points +- delta/2 and the endpoints of s), so it suffices to
    evaluate it at each breakpoint in s and at one point of each open gap in s.
    """
    if not s:
        raise ValueError("empty set")
    half = Fraction(delta) / 2
    pts = {q for p in s for q in (p.lo, p.hi)}
    pts.update(a + sgn * half for a in est.points for sgn in (-1, 1))
    pts = sorted(pts)
    probes = [x for x in pts if x in s]
    probes += [m for m in ((a + b) / 2 for a, b in zip(pts, pts[1:])) if m in s]
    return min(est.success_probability(x, delta) for x in probes)


def check_correct(est: AdversaryEstimator, s: IntervalSet, delta, L: int) -> bool:
    """Whether ``est`` succeeds with probability > 1/L at every point of s."""
    return min_success_probability(est, s, delta) > Fraction(1, L)


# -- Bayesian (uniform prior) success ---------------------------------------------


def adversary_estimator(kind: str, spec: StrategySpec, observed: Sequence,
                        info_set: IntervalSet | None, delta) -> AdversaryEstimator:
    if kind == "last_query":
        return AdversaryEstimator.point_mass(last_query_estimator(observed, spec))
    if kind == "best_replica":
        return best_replica_estimator(observed, spec)
    if kind == "cover_midpoint":
        return cover_midpoint_estimator(info_set, delta)
    raise ValueError(f"unknown estimator kind {kind!r}; expected one of {ESTIMATOR_KINDS}")


def _estimators_by_transcript(spec, kind, leaves, delta) -> dict:
    out = {}
    for queries, group in group_by_queries(leaves).items():
        info = normalize(leaf.consistency for leaf in group) if kind == "cover_midpoint" else None
        out[queries] = adversary_estimator(kind, spec, queries, info, delta)
    return out


def bayes_success_exact(spec: StrategySpec, estimator_kind: str, config: ProblemConfig | None = None,
                        budget: int = DEFAULT_BUDGET) -> Fraction:
    """Exact adversary success probability under a uniform true value and seed."""
    config = config or spec.config
    if spec.d != 1:
        raise ValueError("Bayesian success is implemented for one-dimensional strategies")
    half = config.delta / 2
    leaves = enumerate_leaves(spec, budget=budget)
    ests = _estimators_by_transcript(spec, estimator_kind, leaves, config.delta)
    total = Fraction(0)
    for leaf in leaves:
        cell = IntervalSet((leaf.consistency,))
        for point, w in ests[leaf.queries].support:
            window = IntervalSet((Interval.closed(point - half, point + half),))
            total += w * measure(cell & window)
    return total / spec.seed_space


@dataclass
class LeafTable:
    """Integer-scaled leaf and estimator layout consumed by :func:`kernels.mc_hits`."""

    n_seeds: int
    U: int
    P: int
    half: int
    seed_start: np.ndarray
    leaf_lo: np.ndarray
    sup_start: np.ndarray
    sup_point: np.ndarray
    sup_cum: np.ndarray

    def arrays(self) -> tuple:
        return (self.seed_start, self.leaf_lo, self.sup_start, self.sup_point, self.sup_cum, self.half, self.U, self.P)


def build_leaf_table(spec: StrategySpec, estimator_kind: str, config: ProblemConfig | None = None,
                     budget: int = DEFAULT_BUDGET) -> LeafTable:
    config = config or spec.config
    if spec.d != 1:
        raise ValueError("Bayesian success is implemented for one-dimensional strategies")
    leaves = sorted(enumerate_leaves(spec, budget=budget), key=lambda l: (l.seed.value, l.consistency.lo))
    ests = _estimators_by_transcript(spec, estimator_kind, leaves, config.delta)
    half = config.delta / 2
    dens = {half.denominator}
    pdens = set()
    for leaf in leaves:
        dens.add(leaf.consistency.lo.denominator)
    for est in ests.values():
        for p, w in est.support:
            dens.add(Fraction(p).denominator)
            pdens.add(w.denominator)
    D = math.lcm(*dens)
    P = math.lcm(*pdens)
    Y = spec.seed_space
    shift = 61 - (Y * D).bit_length()
    if shift < 0 or len(leaves) * P >= 2**62:
        raise ValueError("strategy too fine-grained for 64-bit Monte-Carlo tables")
    U = D << shift

    seed_start = np.zeros(Y + 1, dtype=np.int64)
    leaf_lo, sup_start, sup_point, sup_cum = [], [0], [], []
    for leaf in leaves:
        seed_start[leaf.seed.value] += 1
        leaf_lo.append(int(leaf.consistency.lo * U))
        acc = 0
        for p, w in ests[leaf.queries].support:
            acc += int(w * P)
            sup_point.append(int(Fraction(p) * U))
            sup_cum.append(acc)
        sup_start.append(len(sup_point))
    return LeafTable(
        n_seeds=Y,
        U=U,
        P=P,
        half=int(half * U),
        seed_start=np.cumsum(seed_start).astype(np.int64),
        leaf_lo=np.array(leaf_lo, dtype=np.int64),
        sup_start=np.array(sup_start, dtype=np.int64),
        sup_point=np.array(sup_point, dtype=np.int64),
        sup_cum=np.array(sup_cum, dtype=np.int64),
    )


def _block_hits(table: LeafTable, child: np.random.SeedSequence, n: int, backend) -> int:
    rng = np.random.default_rng(child)
    seed_idx = rng.integers(0, table.n_seeds, n, dtype=np.int64)
    u = rng.integers(0, table.U, n, dtype=np.int64)
    c = rng.integers(0, table.P, n, dtype=np.int64)
    return kernels.mc_hits(seed_idx, u, c, *table.arrays(), backend=backend)


def bayes_success(spec: StrategySpec, estimator_kind: str, config: ProblemConfig | None = None,
                  trials: int = 100_000, rng_seed: int = 0, *, block: int = 1 << 15,
                  workers: int = 1, backend: str | None = None, table: LeafTable | None = None) -> Fraction:
    """Monte-Carlo frequency of adversary success, true value uniform on [0, 1).

    The true value is drawn uniformly from a grid of spacing 1/U fine enough
    that every leaf boundary and estimator window edge lies on it. Each
    block of trials draws from its own stream spawned from ``rng_seed``, so
    the result does not depend on ``workers`` or the kernel backend.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    table = table or build_leaf_table(spec, estimator_kind, config)
    sizes = [min(block, trials - i) for i in range(0, trials, block)]
    children = np.random.SeedSequence(rng_seed).spawn(len(sizes))
    jobs = list(zip(children, sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda job: _block_hits(table, job[0], job[1], backend), jobs))
    else:
        hits = sum(_block_hits(table, ch, n, backend) for ch, n in jobs)
    return Fraction(hits, trials)


# -- complexity bounds table --------------------------------------------------------


@dataclass
class BoundsRow:
    config: ProblemConfig
    n_strategy: int
    lower_bound: int
    upper_bound: int
    gap: int = field(init=False)
    lower_at_delta_cap: int = 0

    def __post_init__(self):
        self.gap = self.upper_bound - self.lower_bound

    @property
    def label(self) -> str:
        c = self.config
        return f"L{c.L}_eps{format_rational(c.epsilon)}_delta{format_rational(c.delta)}"

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "n_strategy": self.n_strategy,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "gap": self.gap,
            "lower_at_delta_cap": self.lower_at_delta_cap,
        }


def query_bounds(config: ProblemConfig) -> tuple:
    """(lower, upper) query-complexity bounds, each log rounded up."""
    eps, delta, L = config.epsilon, config.delta, config.L
    lower = max(ceil_log2(1 / eps), ceil_log2(delta / eps) + 2 * L - 4)
    upper = ceil_log2(1 / (L * eps)) + 2 * L
    return lower, upper


def bounds_table(configs: Iterable[ProblemConfig]) -> list:
    rows = []
    for cfg in configs:
        if cfg.d != 1:
            raise ValueError("bounds table covers the one-dimensional problem")
        cfg.check_regime()
        lower, upper = query_bounds(cfg)
        n = query_count(StrategySpec(Family.OPPORTUNISTIC_BISECTION, cfg))
        row = BoundsRow(cfg, n, lower, upper, lower_at_delta_cap=ceil_log2(1 / (cfg.L * cfg.epsilon)) + 2 * cfg.L - 4)
        if lower > upper or lower > n:
            raise BoundsViolation(f"{row.label}: lower bound {lower} exceeds upper {upper} or strategy count {n}")
        if cfg.delta == Fraction(1, cfg.L) and cfg.L >= 3 and row.gap > 4:
            raise BoundsViolation(f"{row.label}: gap {row.gap} > 4 at delta = 1/L")
        rows.append(row)
    return rows


CSV_HEADER = ("config", "epsilon", "delta", "L", "n", "lower", "upper", "gap")


def bounds_csv(rows: Iterable[BoundsRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        c = r.config
        w.writerow([r.label, format_rational(c.epsilon), format_rational(c.delta), c.L,
                    r.n_strategy, r.lower_bound, r.upper_bound, r.gap])
    return buf.getvalue()
