"""Exact rational intervals and canonical interval sets.

Every coordinate in the package is a :class:`fractions.Fraction`. Intervals
carry endpoint inclusivity on both sides, and :class:`IntervalSet` keeps its
parts sorted, disjoint and maximally merged, so two sets with the same points
compare equal.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Iterator

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class MalformedNumber(ValueError):
    pass


class RegimeViolation(ValueError):
    pass


_INT_OR_RATIO = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_DECIMAL = re.compile(r"^\s*[+-]?(\d+\.\d*|\.\d+)\s*$")


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, an integer, or a finite decimal into an exact Fraction.

    Decimals are read as base-10 rationals, so ``"0.1"`` is exactly 1/10.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise MalformedNumber(f"malformed-number: {text!r}")
    m = _INT_OR_RATIO.match(text)
    if m:
        num, den = m.groups()
        if den is not None and int(den) == 0:
            raise MalformedNumber(f"malformed-number: {text!r} (zero denominator)")
        return Fraction(int(num), int(den) if den is not None else 1)
    if _DECIMAL.match(text):
        return Fraction(text.strip())
    raise MalformedNumber(f"malformed-number: {text!r}")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def ceil_log2(x) -> int:
    """Smallest integer k with 2**k >= x, for rational x > 0."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("ceil_log2 needs a positive argument")
    p, q = x.numerator, x.denominator

    def fits(k):  # q * 2**k >= p
        return (q << k) >= p if k >= 0 else q >= (p << -k)

    k = p.bit_length() - q.bit_length()
    while fits(k - 1):
        k -= 1
    while not fits(k):
        k += 1
    return k


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo {self.lo} > hi {self.hi}")
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
            raise ValueError(f"empty interval at {self.lo}")

    @classmethod
    def half_open(cls, lo, hi) -> "Interval":
        return cls(Fraction(lo), Fraction(hi), True, False)

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(Fraction(lo), Fraction(hi), True, True)

    @classmethod
    def make(cls, lo, hi, lo_closed=True, hi_closed=False) -> "Interval | None":
        """Like the constructor, but returns None for an empty interval."""
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return None
        return cls(lo, hi, lo_closed, hi_closed)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi, True, True)

    def intersect(self, other: "Interval") -> "Interval | None":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        return Interval.make(lo, hi, lo_closed, hi_closed)

    def sup_distance(self, x) -> Fraction:
        """Supremum of |x - y| over y in the interval (attained on the closure)."""
        return max(abs(x - self.lo), abs(x - self.hi))

    def to_json(self) -> list:
        return [format_rational(self.lo), format_rational(self.hi), self.lo_closed, self.hi_closed]

    @classmethod
    def from_json(cls, obj) -> "Interval":
        lo, hi, lc, hc = obj
        return cls(parse_rational(lo), parse_rational(hi), bool(lc), bool(hc))

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


UNIT = Interval.half_open(0, 1)


@dataclass(frozen=True)
class IntervalSet:
    """Canonical finite union of intervals. Build through :func:`normalize`."""

    parts: tuple = ()

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def __contains__(self, x) -> bool:
        i = bisect_right(self._los, x) - 1
        return i >= 0 and x in self.parts[i]

    @cached_property
    def _los(self) -> list:
        return [p.lo for p in self.parts]

    @property
    def inf(self) -> Fraction:
        return self.parts[0].lo

    @property
    def sup(self) -> Fraction:
        return self.parts[-1].hi

    def closure(self) -> "IntervalSet":
        return normalize(p.closure() for p in self.parts)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return set_algebra(self, other, "union")

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        return set_algebra(self, other, "intersect")

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return set_algebra(self, other, "difference")

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def issubset(self, other: "IntervalSet") -> bool:
        return not self.difference(other)

    def to_json(self) -> list:
        return [p.to_json() for p in self.parts]

    @classmethod
    def from_json(cls, obj) -> "IntervalSet":
        return normalize(Interval.from_json(p) for p in obj)

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.parts) + "}"


EMPTY = IntervalSet(())


def _combine(a: IntervalSet, b: IntervalSet, fn) -> IntervalSet:
    points = sorted({q for s in (a, b) for p in s.parts for q in (p.lo, p.hi)})
    if not points:
        return EMPTY
    point_in = [fn(x in a, x in b) for x in points]
    gap_in = [fn(m in a, m in b) for m in ((x + y) / 2 for x, y in zip(points, points[1:]))]
    return _assemble(points, point_in, gap_in)


def _assemble(points: list, point_in: list, gap_in: list) -> IntervalSet:
    """Rebuild canonical intervals from atom membership.

    ``point_in[i]``: is ``points[i]`` a member; ``gap_in[i]``: is the open gap
    ``(points[i], points[i+1])``. Nothing outside the breakpoint range is.
    """
    out = []
    start = None  # (value, closed)
    n = len(points)
    for i, x in enumerate(points):
        if point_in[i]:
            if start is None:
                start = (x, True)
        elif start is not None:
            out.append(Interval(start[0], x, start[1], False))
            start = None
        if i < n - 1 and gap_in[i]:
            if start is None:
                start = (x, False)
        elif start is not None:
            out.append(Interval(start[0], x, start[1], True))
            start = None
    return IntervalSet(tuple(out))


def normalize(parts: Iterable[Interval]) -> IntervalSet:
    items = sorted((p for p in parts if p is not None), key=lambda p: (p.lo, not p.lo_closed))
    out = []
    for p in items:
        if out:
            cur = out[-1]
            touches = p.lo < cur.hi or (p.lo == cur.hi and (cur.hi_closed or p.lo_closed))
            if touches:
                if (p.hi, p.hi_closed) > (cur.hi, cur.hi_closed):
                    out[-1] = Interval(cur.lo, p.hi, cur.lo_closed, p.hi_closed)
                continue
        out.append(p)
    return IntervalSet(tuple(out))


_OPS = {
    "union": lambda a, b: a or b,
    "intersect": lambda a, b: a and b,
    "difference": lambda a, b: a and not b,
}


def set_algebra(a: IntervalSet, b: IntervalSet, op: str) -> IntervalSet:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown set operation {op!r}") from None
    return _combine(a, b, fn)


def union_all(sets: Iterable[IntervalSet]) -> IntervalSet:
    return normalize(p for s in sets for p in s.parts)


def measure(s: IntervalSet) -> Fraction:
    return sum((p.length for p in s.parts), ZERO)


def interval_set(*specs) -> IntervalSet:
    """Convenience builder: ``interval_set((0, "1/2"), ("1/2", 1, True, True))``."""
    parts = []
    for spec in specs:
        if isinstance(spec, Interval):
            parts.append(spec)
            continue
        lo, hi, *flags = spec
        lc, hc = (flags + [True, False][len(flags):])[:2]
        parts.append(Interval(parse_rational(lo), parse_rational(hi), lc, hc))
    return normalize(parts)


_INTERVAL_TEXT = re.compile(r"([\[(])\s*([^,\[\]()]+?)\s*,\s*([^,\[\]()]+?)\s*([\])])")


def parse_interval_set(text: str) -> IntervalSet:
    """Parse bracket notation such as ``"[0, 1/4) u [1/2, 3/4]"``.

    Anything between intervals (``u``, ``|``, ``;``, whitespace) is ignored.
    """
    matches = list(_INTERVAL_TEXT.finditer(text))
    leftover = _INTERVAL_TEXT.sub("", text).replace("u", "").replace("|", "").replace(";", "").replace("∪", "")
    if not matches or leftover.strip():
        raise MalformedNumber(f"malformed interval set: {text!r}")
    return normalize(
        Interval(parse_rational(lo), parse_rational(hi), lb == "[", rb == "]")
        for lb, lo, hi, rb in (m.groups() for m in matches)
    )


def _integer_root(n: int, d: int) -> int | None:
    r = round(n ** (1.0 / d))
    for c in (r - 1, r, r + 1):
        if c >= 1 and c**d == n:
            return c
    return None


@dataclass(frozen=True)
class ProblemConfig:
    """Learner accuracy epsilon, adversary accuracy delta, privacy level L, dimension d.

    The constructor only checks the definitional domain (positive accuracies,
    L >= 2, integer L**(1/d)). :meth:`check_regime` enforces the regime
    ``0 < 2*epsilon < delta <= 1/L`` where the complexity bounds apply.
    """

    epsilon: Fraction
    delta: Fraction
    L: int
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "epsilon", parse_rational(self.epsilon))
        object.__setattr__(self, "delta", parse_rational(self.delta))
        if self.epsilon <= 0 or self.epsilon >= 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not isinstance(self.L, int) or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L!r}")
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        if self.d > 1 and _integer_root(self.L, self.d) is None:
            raise ValueError(f"L**(1/d) must be an integer (L={self.L}, d={self.d})")

    @property
    def side(self) -> int:
        """Number of grid cells per axis, L**(1/d)."""
        return self.L if self.d == 1 else _integer_root(self.L, self.d)

    def in_regime(self) -> bool:
        cap = Fraction(1, self.side)
        return 0 < 2 * self.epsilon < self.delta <= cap

    def check_regime(self) -> "ProblemConfig":
        if not self.in_regime():
            bound = "1/L" if self.d == 1 else "L^(-1/d)"
            msg = (
                f"regime-violation: need 2*epsilon < delta <= {bound} "
                f"(epsilon={self.epsilon}, delta={self.delta}, L={self.L}, d={self.d})"
            )
            if self.d == 1 and self.delta >= Fraction(1, self.L - 1):
                msg += "; with delta >= 1/(L-1) the unit interval is (delta, L-1)-coverable"
            raise RegimeViolation(msg)
        return self

    def to_json(self) -> dict:
        return {
            "epsilon": format_rational(self.epsilon),
            "delta": format_rational(self.delta),
            "L": self.L,
            "d": self.d,
        }

    @classmethod
    def from_json(cls, obj) -> "ProblemConfig":
        return cls(parse_rational(obj["epsilon"]), parse_rational(obj["delta"]), int(obj["L"]), int(obj.get("d", 1)))
