"""Learner strategies.

Each family is written as a generator coroutine: it yields query points,
receives the response bit for each through ``send``, and returns the final
estimate. :func:`next_query` and :func:`estimate` replay a coroutine against a
recorded response vector, so a strategy is a pure function of
``(spec, responses, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .core import (
    UNIT,
    Interval,
    ProblemConfig,
    ceil_log2,
    format_rational,
    parse_rational,
)


class EpisodeComplete(Exception):
    pass


class InconsistentResponses(ValueError):
    pass


class Family(str, Enum):
    BISECTION = "Bisection"
    EPSILON_DENSE = "EpsilonDense"
    REPLICATED_BISECTION = "ReplicatedBisection"
    OPPORTUNISTIC_BISECTION = "OpportunisticBisection"
    OPPORTUNISTIC_BISECTION_D = "OpportunisticBisectionD"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip().lower().replace("_", "-")
        try:
            return _ALIASES[key]
        except KeyError:
            for fam in cls:
                if fam.value.lower() == key:
                    return fam
        raise ValueError(f"unknown strategy family {name!r}; expected one of {sorted(_ALIASES)}")


_ALIASES = {
    "bisection": Family.BISECTION,
    "dense": Family.EPSILON_DENSE,
    "epsilon-dense": Family.EPSILON_DENSE,
    "replicated": Family.REPLICATED_BISECTION,
    "replicated-bisection": Family.REPLICATED_BISECTION,
    "rb": Family.REPLICATED_BISECTION,
    "ob": Family.OPPORTUNISTIC_BISECTION,
    "opportunistic": Family.OPPORTUNISTIC_BISECTION,
    "ob-d": Family.OPPORTUNISTIC_BISECTION_D,
    "obd": Family.OPPORTUNISTIC_BISECTION_D,
}

DETERMINISTIC = frozenset({Family.BISECTION, Family.EPSILON_DENSE, Family.REPLICATED_BISECTION})


class AxisQuery(NamedTuple):
    """Axis-aligned hyperplane ``{x : x[axis] = offset}``; response is ``x[axis] >= offset``."""

    axis: int
    offset: Fraction


@dataclass(frozen=True)
class Seed:
    value: int
    size: int

    def __post_init__(self):
        if not 1 <= self.value <= self.size:
            raise ValueError(f"seed {self.value} outside 1..{self.size}")


@dataclass(frozen=True)
class StrategySpec:
    family: Family
    config: ProblemConfig

    def __post_init__(self):
        fam = self.family if isinstance(self.family, Family) else Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        if fam is not Family.OPPORTUNISTIC_BISECTION_D and self.config.d != 1:
            raise ValueError(f"{fam.value} is one-dimensional; got d={self.config.d}")

    @property
    def epsilon(self) -> Fraction:
        return self.config.epsilon

    @property
    def L(self) -> int:
        return self.config.L

    @property
    def d(self) -> int:
        return self.config.d

    @property
    def depth(self) -> int:
        """Bisection steps per sub-interval (per axis for the d-dimensional family)."""
        if self.family in (Family.BISECTION, Family.EPSILON_DENSE):
            return 0
        return max(0, ceil_log2(1 / (self.config.side * self.epsilon)))

    @property
    def n_queries(self) -> int:
        return query_count(self)

    @property
    def seed_space(self) -> int:
        if self.family in DETERMINISTIC:
            return 1
        return self.L * 2 ** (self.d * self.depth)

    def seed(self, value: int = 1) -> Seed:
        return Seed(value, self.seed_space)

    def seeds(self) -> Iterator[Seed]:
        size = self.seed_space
        return (Seed(v, size) for v in range(1, size + 1))

    def to_json(self) -> dict:
        return {"family": self.family.value, **self.config.to_json()}

    @classmethod
    def from_json(cls, obj) -> "StrategySpec":
        return cls(Family.parse(obj["family"]), ProblemConfig.from_json(obj))

    @classmethod
    def build(cls, family, epsilon, delta=None, L=2, d=1) -> "StrategySpec":
        eps = parse_rational(epsilon)
        dl = parse_rational(delta) if delta is not None else Fraction(1, L)
        return cls(Family.parse(family) if isinstance(family, str) else family, ProblemConfig(eps, dl, L, d))


@dataclass(frozen=True)
class Transcript:
    queries: tuple
    responses: tuple
    seed: Seed

    def to_json(self) -> dict:
        return {
            "queries": [encode_query(q) for q in self.queries],
            "responses": list(self.responses),
            "seed": self.seed.value,
            "seed_space": self.seed.size,
        }

    @classmethod
    def from_json(cls, obj) -> "Transcript":
        return cls(
            tuple(decode_query(q) for q in obj["queries"]),
            tuple(int(r) for r in obj["responses"]),
            Seed(int(obj["seed"]), int(obj["seed_space"])),
        )


def encode_query(q):
    if isinstance(q, AxisQuery):
        return [q.axis, format_rational(q.offset)]
    return format_rational(q)


def decode_query(obj):
    if isinstance(obj, list):
        return AxisQuery(int(obj[0]), parse_rational(obj[1]))
    return parse_rational(obj)


def encode_point(x):
    if isinstance(x, tuple):
        return [format_rational(c) for c in x]
    return format_rational(x)


def decode_point(obj):
    if isinstance(obj, list):
        return tuple(parse_rational(c) for c in obj)
    return parse_rational(obj)


def query_count(spec: StrategySpec) -> int:
    eps, L = spec.epsilon, spec.L
    fam = spec.family
    if fam is Family.BISECTION:
        return ceil_log2(1 / eps)
    if fam is Family.EPSILON_DENSE:
        return math.ceil(1 / eps) - 1
    if fam is Family.REPLICATED_BISECTION:
        return L * spec.depth + L - 1
    if fam is Family.OPPORTUNISTIC_BISECTION:
        return 2 * L + spec.depth
    d, m = spec.d, spec.config.side
    return d * spec.depth + 2 * d * m


# -- bisection primitives -------------------------------------------------------


def _half(J: Interval, q: Fraction, bit: int) -> Interval:
    return Interval.half_open(q, J.hi) if bit else Interval.half_open(J.lo, q)


def truthful_step(J: Interval, r: int) -> tuple:
    """Query the midpoint of J; keep the half that the response r points to."""
    q = J.midpoint
    return q, _half(J, q, r)


def fictitious_step(J: Interval, z: int) -> tuple:
    """Same move as :func:`truthful_step`, steered by a seed bit instead of a response."""
    q = J.midpoint
    return q, _half(J, q, z)


def decode_ob_seed(spec: StrategySpec, seed: Seed) -> tuple:
    """Split an OB seed into (decoy cell index per axis, fictitious bits)."""
    nbits = spec.d * spec.depth
    cube, bits = divmod(seed.value - 1, 2**nbits)
    m = spec.config.side
    cell = []
    for _ in range(spec.d):
        cube, c = divmod(cube, m)
        cell.append(c)
    bitlist = [(bits >> (nbits - 1 - i)) & 1 for i in range(nbits)]
    return tuple(cell), bitlist


# -- strategy coroutines ----------------------------------------------------------


def _bisection(spec, seed):
    J = UNIT
    for _ in range(spec.n_queries):
        q = J.midpoint
        r = yield q
        J = _half(J, q, r)
    return J.midpoint


def _epsilon_dense(spec, seed):
    eps = spec.epsilon
    ones = 0
    for k in range(1, spec.n_queries + 1):
        ones += yield k * eps
    lo = ones * eps
    hi = min(lo + eps, Fraction(1))
    return (lo + hi) / 2


def _replicated_bisection(spec, seed):
    L = spec.L
    true_cell = 0
    for i in range(1, L):
        true_cell += yield Fraction(i, L)
    base = Fraction(true_cell, L)
    J = Interval.half_open(base, base + Fraction(1, L))
    for _ in range(spec.depth):
        q = J.midpoint
        offset = q - base
        # replicas go left to right whatever the true cell is
        for j in range(L):
            r = yield Fraction(j, L) + offset
            if j == true_cell:
                r_true = r
        J = _half(J, q, r_true)
    return J.midpoint


def _opportunistic(spec, seed):
    cfg = spec.config
    d, m, eps, M = cfg.d, cfg.side, cfg.epsilon, spec.depth
    scalar = spec.family is Family.OPPORTUNISTIC_BISECTION

    def Q(axis, x):
        return x if scalar else AxisQuery(axis, x)

    # phase 1: grid lines, then the guess lines epsilon to their right
    cell = [0] * d
    for a in range(d):
        for i in range(m):
            cell[a] += yield Q(a, Fraction(i, m))
    hit = [False] * d
    for a in range(d):
        for i in range(m):
            r = yield Q(a, Fraction(i, m) + eps)
            if i == cell[a] - 1:
                hit[a] = r == 0

    decoy, bits = decode_ob_seed(spec, seed)
    in_guess = all(hit)
    est = []
    # phase 2: one bisection per axis inside a sub-interval; fictitious on axes
    # where the guess already pins the coordinate
    for a in range(d):
        idx = decoy[a] if in_guess else cell[a] - 1
        J = Interval.half_open(Fraction(idx, m) + eps, Fraction(idx + 1, m))
        for t in range(M):
            q = J.midpoint
            r = yield Q(a, q)
            J = _half(J, q, bits[a * M + t] if hit[a] else r)
        if hit[a]:
            est.append(Fraction(cell[a] - 1, m) + eps / 2)
        else:
            est.append(J.midpoint)
    return est[0] if scalar else tuple(est)


_COROUTINES = {
    Family.BISECTION: _bisection,
    Family.EPSILON_DENSE: _epsilon_dense,
    Family.REPLICATED_BISECTION: _replicated_bisection,
    Family.OPPORTUNISTIC_BISECTION: _opportunistic,
    Family.OPPORTUNISTIC_BISECTION_D: _opportunistic,
}


# -- replay driver -----------------------------------------------------------------


def full_region(spec: StrategySpec):
    """The set of possible true values: [0,1) or the unit cube as a box."""
    return UNIT if spec.d == 1 and spec.family is not Family.OPPORTUNISTIC_BISECTION_D else (UNIT,) * spec.d


def restrict(region, q, r: int):
    """Intersect a consistency region with the half-space selected by response r."""
    if isinstance(q, AxisQuery):
        half = Interval.make(q.offset, 1) if r else Interval.make(0, q.offset)
        side = region[q.axis].intersect(half) if half is not None else None
        if side is None:
            return None
        return region[: q.axis] + (side,) + region[q.axis + 1 :]
    half = Interval.make(q, 1) if r else Interval.make(0, q)
    return region.intersect(half) if half is not None else None


def _coerce_seed(spec: StrategySpec, seed) -> Seed:
    if isinstance(seed, Seed):
        if seed.size != spec.seed_space:
            raise ValueError(f"seed space {seed.size} does not match strategy ({spec.seed_space})")
        return seed
    return spec.seed(int(seed))


def replay(spec: StrategySpec, responses: Sequence[int], seed=1) -> tuple:
    """Drive the strategy against ``responses``.

    Returns ``(queries, pending, region)``: the queries answered so far, the
    next query or the final estimate once all N responses are in, and the
    set of true values consistent with the responses.
    """
    seed = _coerce_seed(spec, seed)
    n = spec.n_queries
    if len(responses) > n:
        raise EpisodeComplete(f"{len(responses)} responses for a {n}-query strategy")
    gen = _COROUTINES[spec.family](spec, seed)
    region = full_region(spec)
    queries = []
    try:
        q = next(gen)
    except StopIteration as stop:  # zero-query strategy
        return queries, stop.value, region
    for k, r in enumerate(responses):
        if r not in (0, 1):
            raise ValueError(f"response {r!r} is not a bit")
        queries.append(q)
        region = restrict(region, q, r)
        if region is None:
            raise InconsistentResponses(f"no true value produces responses {tuple(responses[: k + 1])} under seed {seed.value}")
        try:
            q = gen.send(r)
        except StopIteration as stop:
            return queries, stop.value, region
    return queries, q, region


def next_query(spec: StrategySpec, responses_so_far: Sequence[int], seed=1):
    if len(responses_so_far) >= spec.n_queries:
        raise EpisodeComplete(f"all {spec.n_queries} queries already answered")
    _, q, _ = replay(spec, responses_so_far, seed)
    return q


def estimate(spec: StrategySpec, responses: Sequence[int], seed=1):
    if len(responses) != spec.n_queries:
        raise ValueError(f"estimate needs {spec.n_queries} responses, got {len(responses)}")
    _, est, _ = replay(spec, responses, seed)
    return est
