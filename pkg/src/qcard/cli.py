"""Command-line front end: ``qcard report | sweep | optimize | simulate``.

Exit codes: 0 success, 2 a headline value missed its tolerance, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from typing import Any

import numpy as np

from . import alice, bob_collective, bob_separate, engine
from .tolerances import TOL

SCHEMA = "qcard/1"
EXIT_OK = 0
EXIT_BREACH = 2
EXIT_USAGE = 64

P_ALICE = (2 + math.sqrt(3)) / 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Let "-pi/6" through as a value rather than an option.
        self._negative_number_matcher = re.compile(r"^-(\d+\.?\d*|\.\d+|[\d.]*\*?pi(/[\d.]+)?)$", re.IGNORECASE)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$", re.IGNORECASE)


def parse_angle(text: str) -> float:
    """Radians, or a multiple of pi such as ``pi/12``, ``-pi/6`` or ``2*pi/3``."""
    m = _ANGLE.match(text)
    if m:
        sign, factor, denom = m.groups()
        value = math.pi * (float(factor) if factor else 1.0) / (float(denom) if denom else 1.0)
        return -value if sign == "-" else value
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def default_seed() -> int:
    env = os.environ.get("QCARD_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"QCARD_SEED: {exc}") from None


# --- output -----------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _text_value(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value).lower() if isinstance(value, bool) else "null"
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_text_value(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_text_value(v)}" for k, v in value.items()) + "}"
    return str(value)


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value)
    return str(value)


def render(document: dict[str, Any], fmt: str, table_key: str | None = None) -> str:
    """Serialize a report document; ``table_key`` names the list of row dicts used for CSV/text tables."""
    document = _jsonable(document)
    if fmt == "json":
        return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
    rows = document.get(table_key) if table_key else None
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if rows:
            header = list(rows[0])
            writer.writerow(header)
            for row in rows:
                writer.writerow([_csv_cell(row.get(h)) for h in header])
        else:
            writer.writerow(list(document))
            writer.writerow([_csv_cell(v) for v in document.values()])
        return buf.getvalue()
    lines = []
    for key, value in document.items():
        if key == table_key:
            continue
        lines.append(f"{key}: {_text_value(value)}")
    if rows:
        header = list(rows[0])
        lines.append("\t".join(header))
        for row in rows:
            lines.append("\t".join(_text_value(row.get(h)) for h in header))
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------


def _entry(name, value, reference, method, tolerance) -> dict[str, Any]:
    deviation = abs(value - reference)
    return {
        "name": name,
        "value": value,
        "reference": reference,
        "method": method,
        "deviation": deviation,
        "tolerance": tolerance,
        "pass": bool(deviation <= tolerance),
    }


def build_report(restarts: int = 0, seed: int = 0) -> dict[str, Any]:
    """Every headline number with its reference value, method and tolerance."""
    eps = 8 * np.finfo(float).eps
    opt = alice.optimize_alice(alice.AliceStrategy.FIRST)
    mirror = alice.optimize_alice(alice.AliceStrategy.SECOND)
    s_argmin = alice.entropy_argmin(alice.AliceStrategy.FIRST, TOL.entropy_grid)
    sep = bob_separate.separate_report()
    coeffs = bob_collective.optimal_coefficients()
    collective = bob_collective.evaluate(coeffs)
    p_poly = collective.diagnostics["polynomial"]
    p_engine = engine.exact_success(engine.StrategySpec.bob_collective(coeffs))

    entries = [
        _entry("p_alice", opt.probability, P_ALICE, "optimization", TOL.alice_probability),
        _entry("alpha_star", opt.alpha, math.pi / 12, "optimization", TOL.alice_angle),
        _entry("p_alice_mirror", mirror.probability, P_ALICE, "optimization", TOL.alice_probability),
        _entry("alpha_star_mirror", mirror.alpha, -math.pi / 12, "optimization", TOL.alice_angle),
        _entry("entropy_argmin", s_argmin, math.pi / 12, "enumeration", TOL.entropy_argmin),
        _entry("p12", sep.p12, bob_separate.P12, "closed-form", eps),
        _entry("p21", sep.p21, bob_separate.P21, "closed-form", eps),
        _entry("p_sep", sep.p_sep, bob_separate.P_SEPARATE, "closed-form", eps),
        _entry("p_sep_enumeration", sep.enumeration_p_sep, bob_separate.P_SEPARATE, "enumeration", TOL.separate_window),
        _entry("p_bob_combined", collective.probability, bob_collective.P_COMBINED, "enumeration", TOL.collective_value),
        _entry("p_bob_combined_polynomial", p_poly, bob_collective.P_COMBINED, "closed-form", TOL.collective_value),
        _entry("p_bob_combined_engine", p_engine, bob_collective.P_COMBINED, "enumeration", TOL.collective_value),
    ]
    optimized = None
    if restarts > 0:
        optimized = bob_collective.optimize_collective(bob_collective.GuessChoice.III, restarts, seed)
        entries.append(
            _entry("p_bob_combined_optimized", optimized.probability, bob_collective.P_COMBINED, "optimization", TOL.optimum)
        )
    dominance = bool(opt.probability < sep.enumeration_p_sep < collective.probability)
    document = {
        "schema": SCHEMA,
        "p_alice": opt.probability,
        "alpha_star": opt.alpha,
        "entropy_argmin": s_argmin,
        "p1": sep.p1,
        "p2": sep.p2,
        "p12": sep.p12,
        "p21": sep.p21,
        "p_sep": sep.p_sep,
        "p_sep_enumeration": sep.enumeration_p_sep,
        "p_sep_discrepancy": sep.discrepancy,
        "p_bob_combined": collective.probability,
        "p_bob_combined_polynomial": p_poly,
        "gram_residual": collective.diagnostics["gram_residual"],
        "dominance": dominance,
        "passed": bool(dominance and all(e["pass"] for e in entries)),
        "entries": entries,
    }
    if optimized is not None:
        document["p_bob_combined_optimized"] = optimized.probability
    return document


def cmd_report(args) -> int:
    doc = build_report(args.restarts, args.seed)
    _emit(render(doc, args.format, "entries"), args.out)
    if not doc["passed"]:
        failing = [e["name"] for e in doc["entries"] if not e["pass"]]
        if not doc["dominance"]:
            failing.append("dominance")
        print("tolerance breach: " + ", ".join(failing), file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def _sweep_rows(actor: str, strategy, lo: float, hi: float, steps: int) -> list[dict[str, Any]]:
    grid = np.linspace(lo, hi, steps)
    rows = []
    if actor == "alice":
        for a in grid:
            a = float(a)
            rows.append(
                {
                    "alpha": a,
                    "probability": alice.success_probability(a, strategy),
                    "entropy": alice.shannon_entropy(a, strategy),
                    "in_domain": alice.in_domain(a, strategy),
                }
            )
    else:
        for a in grid:
            a = float(a)
            protocol = bob_separate.SequentialProtocol(bob_separate.FirstStage(alpha=a))
            rows.append({"alpha": a, "probability": bob_separate.enumerate_sequential(protocol)})
    return rows


def cmd_sweep(args) -> int:
    if args.actor not in ("alice", "bob-separate"):
        raise UsageError(f"sweep supports --actor alice or bob-separate, not {args.actor}")
    lo, hi = args.range_from, args.range_to
    if not lo < hi:
        raise UsageError(f"empty sweep range [{lo}, {hi}]")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    try:
        alice.check_angle([lo, hi])
    except alice.AngleError as exc:
        raise UsageError(str(exc)) from None
    strategy = alice.AliceStrategy.parse(args.strategy)
    rows = _sweep_rows(args.actor, strategy, lo, hi, args.steps)
    doc = {"schema": SCHEMA, "actor": args.actor, "rows": rows}
    if args.actor == "alice":
        doc["strategy"] = int(strategy)
    _emit(render(doc, args.format, "rows"), args.out)
    return EXIT_OK


def _restart_stats(values) -> dict[str, Any]:
    v = np.asarray(values, dtype=float)
    return {
        "completed": int(v.size),
        "min": float(v.min()),
        "median": float(np.median(v)),
        "max": float(v.max()),
        "within_tolerance": int(np.count_nonzero(v >= v.max() - TOL.optimum)),
    }


def optimize_document(actor: str, strategy=1, choice="III", restarts: int = 100, seed: int = 0) -> dict[str, Any]:
    if actor == "alice":
        strategy = alice.AliceStrategy.parse(strategy)
        opt = alice.optimize_alice(strategy)
        return {"schema": SCHEMA, "actor": actor, "strategy": int(strategy), "alpha": opt.alpha, "probability": opt.probability}
    if actor == "bob-separate":
        a, p = bob_separate.optimize_first_angle()
        return {"schema": SCHEMA, "actor": actor, "alpha": a, "probability": p}
    if actor == "bob-collective":
        choice = bob_collective.GuessChoice.parse(choice)
        opt = bob_collective.optimize_collective(choice, restarts, seed)
        return {
            "schema": SCHEMA,
            "actor": actor,
            "choice": choice.value,
            "probability": opt.probability,
            "coefficients": opt.coefficients.as_dict(),
            "restarts": opt.restarts,
            "seed": seed,
            "failed": opt.failed,
            "restart_stats": _restart_stats(opt.restart_values),
        }
    if actor == "bob-full-frame":
        opt = bob_collective.optimize_full_frame(restarts, seed)
        return {
            "schema": SCHEMA,
            "actor": actor,
            "probability": opt.probability,
            "frame": opt.frame,
            "guess_map": opt.guess_map,
            "restarts": opt.restarts,
            "seed": seed,
            "restart_stats": _restart_stats(opt.restart_values),
        }
    raise UsageError(f"unknown actor {actor!r}")


def cmd_optimize(args) -> int:
    doc = optimize_document(args.actor, args.strategy, args.choice, args.restarts, args.seed)
    _emit(render(doc, args.format), args.out)
    return EXIT_OK


def simulation_spec(actor: str, alpha: float, strategy, choice) -> engine.StrategySpec:
    if actor == "alice":
        return engine.StrategySpec.alice(alpha, strategy)
    if actor == "bob-separate":
        return engine.StrategySpec.bob_separate(
            bob_separate.SequentialProtocol(bob_separate.FirstStage(alpha=alpha))
        )
    if actor == "bob-collective":
        return engine.StrategySpec.bob_collective(bob_collective.optimal_coefficients(), choice)
    if actor == "uniform":
        return engine.StrategySpec.uniform()
    raise UsageError(f"simulate supports alice, bob-separate, bob-collective or uniform, not {actor}")


def cmd_simulate(args) -> int:
    try:
        spec = simulation_spec(args.actor, args.alpha, args.strategy, args.choice)
        config = engine.SimulationConfig(args.trials, args.seed, args.shards)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = engine.simulate(spec, config)
    doc = {
        "schema": SCHEMA,
        "actor": args.actor,
        "seed": config.seed,
        "shards": config.shards,
        "estimate": report.estimate,
        "std_error": report.std_error,
        "trials": report.trials,
        "successes": report.successes,
        "exact_reference": report.exact_reference,
        "z_score": report.z_score,
    }
    if args.actor in ("alice", "bob-separate"):
        doc["alpha"] = args.alpha
    if args.actor == "alice":
        doc["strategy"] = int(alice.AliceStrategy.parse(args.strategy))
    if args.actor == "bob-collective":
        doc["choice"] = bob_collective.GuessChoice.parse(args.choice).value
    _emit(render(doc, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--seed", type=_seed, default=None, help="overrides QCARD_SEED")

    parser = _Parser(prog="qcard", description="Optimal guessing strategies in the three-card quantum game.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("report", parents=[common], help="reproduce every headline number")
    p.add_argument("--restarts", type=int, default=0, help="also run the collective optimizer with this many restarts")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", parents=[common], help="tabulate success (and entropy) over an angle range")
    p.add_argument("--actor", default="alice")
    p.add_argument("--strategy", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--from", dest="range_from", type=parse_angle, default=-math.pi / 6)
    p.add_argument("--to", dest="range_to", type=parse_angle, default=math.pi / 6)
    p.add_argument("--steps", type=int, default=61)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", parents=[common], help="search for an optimal strategy")
    p.add_argument("--actor", choices=("alice", "bob-separate", "bob-collective", "bob-full-frame"), default="alice")
    p.add_argument("--strategy", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--choice", choices=("I", "II", "III"), default="III")
    p.add_argument("--restarts", type=_positive_int, default=100)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo play against the exact value")
    p.add_argument("--actor", choices=("alice", "bob-separate", "bob-collective", "uniform"), default="alice")
    p.add_argument("--alpha", type=parse_angle, default=math.pi / 12)
    p.add_argument("--strategy", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--choice", choices=("I", "II", "III"), default="III")
    p.add_argument("--trials", type=_positive_int, default=1_000_000)
    p.add_argument("--shards", type=_positive_int, default=1)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = default_seed()
        return args.func(args)
    except (UsageError, alice.AngleError) as exc:
        print(f"qcard: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
