"""Command-line front end: ``pslearn <command> [options]``.

Exit status: 0 on success, 1 when a verification verdict fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .adversary import (
    UnknownTranscript,
    cover_number,
    greedy_cover,
    information_set,
    outer_information_set,
    packing_points,
)
from .core import MalformedNumber, ProblemConfig, RegimeViolation, format_rational, parse_interval_set, parse_rational
from .oracle import DEFAULT_BUDGET, BudgetExceeded, enumerate_leaves, run_episode, write_leaves_jsonl
from .strategies import Family, StrategySpec, decode_query, encode_point
from .verifier import (
    ESTIMATOR_KINDS,
    BoundsViolation,
    bayes_success,
    bounds_csv,
    bounds_table,
    verify_private,
)

COMMANDS = ("simulate", "leaves", "infoset", "cover", "verify", "bayes", "table")
PRESETS = ("ob-private", "gap-grid", "bayes-contrast")
# older spellings accepted on the command line
PRESET_ALIASES = {"prop1": "ob-private", "corollary1": "gap-grid", "appendix-b": "bayes-contrast"}


class InputError(ValueError):
    """Bad user input; the message names the offending field."""


@dataclass
class RunConfig:
    command: str
    strategy: dict = field(default_factory=dict)
    io: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)
    budget: int = DEFAULT_BUDGET
    extra: dict = field(default_factory=dict)

    def spec(self) -> StrategySpec:
        s = self.strategy
        for key in ("family", "epsilon"):
            if key not in s:
                raise InputError(f"{self.command}: missing required field strategy.{key}")
        L = _int_field("L", s.get("L", 2))
        d = _int_field("d", s.get("d", 1))
        eps = _rational_field("epsilon", s["epsilon"])
        delta = _rational_field("delta", s["delta"]) if s.get("delta") is not None else Fraction(1, L)
        try:
            fam = Family.parse(s["family"])
            return StrategySpec(fam, ProblemConfig(eps, delta, L, d))
        except ValueError as e:
            raise InputError(f"strategy: {e}") from None


def _rational_field(name: str, value) -> Fraction:
    try:
        return parse_rational(value)
    except MalformedNumber as e:
        raise InputError(f"{name}: {e}") from None


def _int_field(name: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InputError(f"{name}: expected an integer, got {value!r}") from None


def _list_field(name: str, text: str, conv) -> list:
    return [conv(name, tok) for tok in str(text).split(",") if tok.strip()]


def load_config_file(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pslearn", description="Private sequential learning experiments.")
    p.add_argument("command", nargs="?", choices=COMMANDS, help="may instead come from the --config document")
    p.add_argument("--config", help="JSON RunConfig document; flags override its fields")
    p.add_argument("--preset", choices=PRESETS + tuple(PRESET_ALIASES))
    g = p.add_argument_group("strategy")
    g.add_argument("--strategy", help="bisection | dense | rb | ob | ob-d")
    g.add_argument("--epsilon")
    g.add_argument("--delta")
    g.add_argument("--L")
    g.add_argument("--d")
    g.add_argument("--seed", help="seed index in 1..seed_space (simulate)")
    g.add_argument("--v", help="true value; comma-separated coordinates in d > 1 (simulate)")
    g.add_argument("--queries", help="comma-separated observed queries (infoset)")
    g.add_argument("--set", help='interval set such as "[0,1/4) u [1/2,3/4]" (cover)')
    m = p.add_argument_group("monte carlo")
    m.add_argument("--trials")
    m.add_argument("--rng-seed")
    m.add_argument("--estimator", choices=ESTIMATOR_KINDS)
    m.add_argument("--backend", choices=("cython", "python"))
    t = p.add_argument_group("table")
    t.add_argument("--Ls", help="comma-separated L values")
    t.add_argument("--epsilons", help="comma-separated epsilon values")
    o = p.add_argument_group("execution and output")
    o.add_argument("--budget")
    o.add_argument("--workers", default="1")
    o.add_argument("--out", help="output file (default stdout)")
    o.add_argument("--format", choices=("json", "csv"))
    return p


def run_config_from_args(ns: argparse.Namespace) -> RunConfig:
    doc = load_config_file(ns.config) if ns.config else {}
    command = ns.command or doc.get("command")
    if command not in COMMANDS:
        raise InputError(f"command: expected one of {', '.join(COMMANDS)}, got {command!r}")
    cfg = RunConfig(
        command=command,
        strategy=dict(doc.get("strategy", {})),
        io=dict(doc.get("io", {})),
        mc=dict(doc.get("mc", {})),
        budget=doc.get("budget", DEFAULT_BUDGET),
        extra={k: v for k, v in doc.items() if k not in ("command", "strategy", "io", "mc", "budget")},
    )
    for flag, key in (("strategy", "family"), ("epsilon", "epsilon"), ("delta", "delta"), ("L", "L"), ("d", "d")):
        if getattr(ns, flag) is not None:
            cfg.strategy[key] = getattr(ns, flag)
    for flag in ("out", "format"):
        if getattr(ns, flag) is not None:
            cfg.io[flag] = getattr(ns, flag)
    if ns.trials is not None:
        cfg.mc["trials"] = ns.trials
    if ns.rng_seed is not None:
        cfg.mc["rng_seed"] = ns.rng_seed
    if ns.budget is not None:
        cfg.budget = ns.budget
    cfg.budget = _int_field("budget", cfg.budget)
    if ns.preset is not None:
        cfg.extra["preset"] = PRESET_ALIASES.get(ns.preset, ns.preset)
    for key in ("seed", "v", "queries", "set", "estimator", "backend", "Ls", "epsilons", "workers"):
        if getattr(ns, key) is not None:
            cfg.extra[key] = getattr(ns, key)
    return cfg


# -- commands ---------------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig):
    spec = cfg.spec()
    if "v" not in cfg.extra:
        raise InputError("simulate: missing required field v")
    coords = _list_field("v", cfg.extra["v"], _rational_field)
    v = coords[0] if spec.d == 1 else tuple(coords)
    if spec.d > 1 and len(coords) != spec.d:
        raise InputError(f"v: expected {spec.d} coordinates, got {len(coords)}")
    seed = _int_field("seed", cfg.extra.get("seed", 1))
    transcript, est = run_episode(spec, v, seed)
    return 0, {"strategy": spec.to_json(), "v": encode_point(v), "transcript": transcript.to_json(),
               "estimate": encode_point(est)}


def cmd_leaves(cfg: RunConfig):
    spec = cfg.spec()
    return 0, enumerate_leaves(spec, budget=cfg.budget, workers=_int_field("workers", cfg.extra.get("workers", 1)))


def cmd_infoset(cfg: RunConfig):
    spec = cfg.spec()
    if "queries" not in cfg.extra:
        raise InputError("infoset: missing required field queries")
    try:
        observed = tuple(decode_query(tok.strip()) for tok in cfg.extra["queries"].split(",") if tok.strip())
    except MalformedNumber as e:
        raise InputError(f"queries: {e}") from None
    if spec.d != 1:
        raise InputError("infoset: only one-dimensional strategies take --queries")
    info = information_set(spec, observed, enumerate_leaves(spec, budget=cfg.budget))
    return 0, {
        "strategy": spec.to_json(),
        "queries": [format_rational(q) for q in observed],
        "information_set": info.to_json(),
        "outer_information_set": outer_information_set(observed, spec.epsilon).to_json(),
        "cover_number": cover_number(info, spec.config.delta),
    }


def cmd_cover(cfg: RunConfig):
    if "set" not in cfg.extra:
        raise InputError("cover: missing required field set")
    if "delta" not in cfg.strategy:
        raise InputError("cover: missing required field delta")
    try:
        s = parse_interval_set(cfg.extra["set"])
    except MalformedNumber as e:
        raise InputError(f"set: {e}") from None
    delta = _rational_field("delta", cfg.strategy["delta"])
    if delta <= 0:
        raise InputError("delta: must be positive")
    return 0, {
        "set": s.to_json(),
        "delta": format_rational(delta),
        "cover_number": cover_number(s, delta),
        "cover": [iv.to_json() for iv in greedy_cover(s, delta)],
        "packing": [format_rational(x) for x in packing_points(s, delta)],
    }


def cmd_verify(cfg: RunConfig):
    if cfg.extra.get("preset") == "ob-private":
        cfg.strategy = {"family": "ob", "epsilon": "1/24", "delta": "1/3", "L": 3, **cfg.strategy}
    spec = cfg.spec()
    report = verify_private(spec, budget=cfg.budget, workers=_int_field("workers", cfg.extra.get("workers", 1)))
    return (0 if report.ok else 1), {"strategy": spec.to_json(), "report": report.to_json()}


def _bayes_one(cfg: RunConfig, spec: StrategySpec, kind: str) -> dict:
    trials = _int_field("trials", cfg.mc.get("trials", 100_000))
    rng_seed = _int_field("rng_seed", cfg.mc.get("rng_seed", 0))
    if trials < 1:
        raise InputError("trials: must be >= 1")
    p = bayes_success(spec, kind, trials=trials, rng_seed=rng_seed,
                      workers=_int_field("workers", cfg.extra.get("workers", 1)), backend=cfg.extra.get("backend"))
    return {"strategy": spec.to_json(), "estimator": kind, "trials": trials, "rng_seed": rng_seed,
            "success": format_rational(p), "success_float": float(p), "privacy_threshold": format_rational(Fraction(1, spec.L))}


def cmd_bayes(cfg: RunConfig):
    if cfg.extra.get("preset") == "bayes-contrast":
        rb = StrategySpec.build(Family.REPLICATED_BISECTION, "1/16", "1/2", 2)
        ob = StrategySpec.build(Family.OPPORTUNISTIC_BISECTION, "1/24", "1/3", 3)
        return 0, {"rows": [_bayes_one(cfg, rb, "best_replica"), _bayes_one(cfg, ob, "last_query")]}
    spec = cfg.spec()
    kind = cfg.extra.get("estimator")
    if kind is None:
        kind = {Family.REPLICATED_BISECTION: "best_replica",
                Family.OPPORTUNISTIC_BISECTION: "last_query"}.get(spec.family, "cover_midpoint")
    return 0, _bayes_one(cfg, spec, kind)


def cmd_table(cfg: RunConfig):
    preset = cfg.extra.get("preset")
    if preset == "gap-grid":
        Ls = _list_field("Ls", cfg.extra.get("Ls", "3,4,5"), _int_field)
        if "epsilons" in cfg.extra:
            eps_for = lambda L: _list_field("epsilons", cfg.extra["epsilons"], _rational_field)
        else:
            eps_for = lambda L: [Fraction(1, 8 * L), Fraction(1, 16 * L), Fraction(1, 32 * L)]
        configs = [ProblemConfig(e, Fraction(1, L), L) for L in Ls for e in eps_for(L)]
    elif preset == "ob-private":
        configs = [ProblemConfig(Fraction(1, 24), Fraction(1, 3), 3)]
    else:
        configs = [cfg.spec().config]
    rows = bounds_table(configs)
    return 0, rows


_HANDLERS = {
    "simulate": cmd_simulate,
    "leaves": cmd_leaves,
    "infoset": cmd_infoset,
    "cover": cmd_cover,
    "verify": cmd_verify,
    "bayes": cmd_bayes,
    "table": cmd_table,
}


def render(command: str, payload, fmt: str | None) -> str:
    if command == "leaves":
        import io
        buf = io.StringIO()
        write_leaves_jsonl(payload, buf)
        return buf.getvalue()
    if command == "table":
        if (fmt or "csv") == "csv":
            return bounds_csv(payload)
        return json.dumps([r.to_json() for r in payload], indent=2) + "\n"
    if fmt == "csv":
        raise InputError(f"format: csv output is only available for table, not {command}")
    return json.dumps(payload, indent=2) + "\n"


def dispatch(cfg: RunConfig) -> int:
    """Run one command and write its artifact; returns the exit status."""
    status, payload = _HANDLERS[cfg.command](cfg)
    text = render(cfg.command, payload, cfg.io.get("format"))
    out = cfg.io.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status:
        print(f"pslearn {cfg.command}: verification failed", file=sys.stderr)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return dispatch(run_config_from_args(ns))
    except BoundsViolation as e:
        print(f"pslearn: bounds check failed: {e}", file=sys.stderr)
        return 1
    except (InputError, MalformedNumber, RegimeViolation, UnknownTranscript, BudgetExceeded, OSError) as e:
        print(f"pslearn: error: {e}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
