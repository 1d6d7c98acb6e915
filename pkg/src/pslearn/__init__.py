"""Private sequential learning: learner strategies, an exact adversary, and privacy verifiers."""

from .core import Interval, IntervalSet, ProblemConfig, measure, normalize, parse_rational, set_algebra
from .strategies import Family, Seed, StrategySpec, Transcript, estimate, next_query, query_count
from .oracle import enumerate_leaves, respond, run_episode

__all__ = [
    "Family",
    "Interval",
    "IntervalSet",
    "ProblemConfig",
    "Seed",
    "StrategySpec",
    "Transcript",
    "enumerate_leaves",
    "estimate",
    "measure",
    "next_query",
    "normalize",
    "parse_rational",
    "query_count",
    "respond",
    "run_episode",
    "set_algebra",
]
