"""What an observer of the queries (but not the responses) can infer."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .core import ONE, ZERO, Interval, IntervalSet, normalize
from .oracle import enumerate_leaves
from .strategies import Family, StrategySpec


class UnknownTranscript(LookupError):
    pass


class WrongFamily(ValueError):
    pass


@dataclass(frozen=True)
class AdversaryEstimator:
    """Finitely supported randomized estimate: ``((point, probability), ...)``."""

    support: tuple

    def __post_init__(self):
        support = tuple((p, Fraction(w)) for p, w in self.support)
        if not support:
            raise ValueError("estimator needs at least one support point")
        if any(w <= 0 for _, w in support):
            raise ValueError("support probabilities must be positive")
        if sum(w for _, w in support) != 1:
            raise ValueError("support probabilities must sum to 1")
        object.__setattr__(self, "support", support)

    @classmethod
    def uniform(cls, points: Sequence) -> "AdversaryEstimator":
        w = Fraction(1, len(points))
        merged: dict = {}
        for p in points:
            merged[p] = merged.get(p, ZERO) + w
        return cls(tuple(sorted(merged.items())))

    @classmethod
    def point_mass(cls, point) -> "AdversaryEstimator":
        return cls(((point, ONE),))

    @property
    def points(self) -> list:
        return [p for p, _ in self.support]

    def success_probability(self, x, delta) -> Fraction:
        """P(|estimate - x| <= delta/2)."""
        half = Fraction(delta) / 2
        return sum((w for p, w in self.support if abs(p - x) <= half), ZERO)


# -- information sets -----------------------------------------------------------


def information_set(spec: StrategySpec, observed: Sequence, leaves: Iterable | None = None):
    """All true values that produce ``observed`` under some seed.

    One-dimensional strategies give an :class:`IntervalSet`; the
    d-dimensional family gives a tuple of boxes (tuples of per-axis Intervals).
    """
    if leaves is None:
        leaves = enumerate_leaves(spec)
    observed = tuple(observed)
    regions = [leaf.consistency for leaf in leaves if leaf.queries == observed]
    if not regions:
        raise UnknownTranscript(f"no leaf of {spec.family.value} issues queries {observed}")
    if isinstance(regions[0], Interval):
        return normalize(regions)
    return tuple(dict.fromkeys(regions))


def outer_information_set(observed: Sequence, epsilon) -> IntervalSet:
    """Union of the cells between sorted queries (with 0 and 1 added) of length <= epsilon."""
    eps = Fraction(epsilon)
    pts = sorted(set([ZERO, *map(Fraction, observed), ONE]))
    return normalize(
        Interval.half_open(a, b) for a, b in zip(pts, pts[1:]) if b - a <= eps
    )


# -- covers and packings --------------------------------------------------------


def _inf_above(parts: Sequence[Interval], t) -> Fraction | None:
    """inf {x in union(parts) : x > t}, or None if there is no such x."""
    for p in parts:
        if p.hi > t:
            return max(p.lo, t)
    return None


def greedy_cover(s: IntervalSet, delta) -> list:
    """Closed length-delta intervals, each anchored at the leftmost uncovered point."""
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not s:
        return []
    cover = []
    p = s.inf
    while p is not None:
        cover.append(Interval.closed(p, p + delta))
        p = _inf_above(s.parts, p + delta)
    return cover


def cover_number(s: IntervalSet, delta) -> int:
    return len(greedy_cover(s, delta))


def packing_points(s: IntervalSet, delta) -> list:
    """Points of the closure of s, pairwise more than delta apart.

    Walks the helper anchors z_1 < z_2 < ... whose windows [z_i, z_i + delta]
    cover the closure. An anchor that sits exactly delta past its predecessor
    and has room to its right is nudged right by i * step, with step small
    enough that every gap stays above delta.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not s:
        raise ValueError("packing_points needs a non-empty set")
    parts = s.closure().parts
    anchors = [parts[0].lo]
    nudge = [False]
    limits = [delta]  # every nudge must stay below each of these
    while True:
        t = anchors[-1] + delta
        part = next((p for p in parts if p.hi >= t), None)
        if part is None:
            break
        y = max(part.lo, t)
        if y > t:
            anchors.append(y)
            nudge.append(False)
            limits.append(y - t)
        elif part.hi > y:
            anchors.append(y)
            nudge.append(True)
            limits.append(part.hi - y)
        else:
            # y is a right endpoint: jump to the next component
            y = _inf_above(parts, t)
            if y is None:
                break
            anchors.append(y)
            nudge.append(False)
            limits.append(y - t)
    step = min(limits) / (4 * (len(anchors) + 1))
    return [z + i * step if n else z for i, (z, n) in enumerate(zip(anchors, nudge))]


def linf_packing(boxes: Sequence, delta) -> list:
    """Greedy lexicographic choice of box corners, pairwise l-inf distance > delta.

    A box is a tuple of per-axis Intervals or a ``(lo_corner, hi_corner)`` pair.
    The result size lower-bounds the number of edge-delta cubes needed to cover
    the union of the boxes.
    """
    delta = Fraction(delta)
    corners = set()
    for box in boxes:
        if box and isinstance(box[0], Interval):
            sides = [(iv.lo, iv.hi) for iv in box]
        else:
            lo, hi = box
            sides = list(zip(lo, hi))
        corners.update(product(*sides))
    chosen: list = []
    for c in sorted(corners):
        if all(max(abs(a - b) for a, b in zip(c, k)) > delta for k in chosen):
            chosen.append(c)
    return chosen


# -- concrete estimators --------------------------------------------------------


def cover_midpoint_estimator(s: IntervalSet, delta) -> AdversaryEstimator:
    """Uniform over the midpoints of the greedy delta-cover of s."""
    delta = Fraction(delta)
    mids = []
    for iv in greedy_cover(s, delta):
        m = iv.lo + delta / 2
        # the window only has to reach 1; pull the midpoint back inside [0, 1)
        if m >= 1 - delta / 2:
            m = max(iv.lo, 1 - delta / 2)
        mids.append(m)
    return AdversaryEstimator.uniform(mids)


def last_query_estimator(observed: Sequence, spec: StrategySpec) -> Fraction:
    if spec.family is not Family.OPPORTUNISTIC_BISECTION:
        raise WrongFamily(f"last-query estimator targets OpportunisticBisection, not {spec.family.value}")
    if spec.depth == 0 or len(observed) != spec.n_queries:
        raise ValueError("need a complete transcript with a local search phase")
    return observed[-1]


def best_replica_estimator(observed: Sequence, spec: StrategySpec) -> AdversaryEstimator:
    """Uniform over the L replicas of the final bisection query."""
    if spec.family is not Family.REPLICATED_BISECTION:
        raise WrongFamily(f"best-replica estimator targets ReplicatedBisection, not {spec.family.value}")
    if spec.depth == 0 or len(observed) != spec.n_queries:
        raise ValueError("need a complete transcript with a replicated phase")
    return AdversaryEstimator.uniform(list(observed[-spec.L :]))
