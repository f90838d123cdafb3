"""``probcsp`` command-line interface.

Exit codes: 0 success, 1 an empty domain was detected by ``ac3``,
2 input error (unreadable file, malformed JSON, invalid network or events,
enumeration budget exceeded).
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

from .calibration import rows_to_csv, run_calibrate
from .core import NetworkError, RemovalProfile, ac3, network_to_document, read_network, read_profile
from .generator import GeneratorConfig, generate
from .oracle import (
    BudgetExceeded,
    DEFAULT_BUDGET,
    EnumerationBudget,
    monte_carlo_expected_network,
    oracle_expected_domain,
    oracle_expected_network,
    oracle_prob_network,
)
from .probability import analyze, report_to_dict
from .propagation import prob_ac, propagation_trace, state_to_dict

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_json_file(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _network(path: str):
    _load_json_file(path)  # surface parse errors with location first
    try:
        return read_network(path)
    except NetworkError as exc:
        raise InputError(f"{path}: {exc}") from None


def _profile(net, path: str | None):
    if path is None:
        return RemovalProfile.zeros(net)
    try:
        if Path(path).read_text(encoding="utf-8").strip():
            _load_json_file(path)
        return read_profile(net, path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except NetworkError as exc:
        raise InputError(f"{path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def cmd_analyze(args) -> int:
    net = _network(args.network)
    profile = _profile(net, args.events)
    _emit(_dump(report_to_dict(net, analyze(net, net.counts, profile))), args.out)
    return EXIT_OK


def cmd_propagate(args) -> int:
    net = _network(args.network)
    profile = _profile(net, args.events)
    state = prob_ac(net, net.counts, profile)
    if args.trace:
        events = propagation_trace(net, net.counts, profile)
        Path(args.trace).write_text("".join(json.dumps(ev) + "\n" for ev in events), encoding="utf-8")
    _emit(_dump(state_to_dict(net, state)), args.out)
    return EXIT_OK


def _frac(x: Fraction) -> dict[str, Any]:
    return {"exact": f"{x.numerator}/{x.denominator}", "float": float(f"{float(x):.9g}")}


def cmd_oracle(args) -> int:
    net = _network(args.network)
    profile = _profile(net, args.events)
    budget = EnumerationBudget(args.budget)
    doc: dict[str, Any] = {}
    try:
        doc["values"] = [
            {"var": net.names[i], "value": w, "p_network": _frac(oracle_prob_network(net, profile, i, w, budget))}
            for i in range(net.n)
            for w in net.domains[i]
        ]
        doc["domains"] = [
            {"var": net.names[i], "e": _frac(oracle_expected_domain(net, profile, i, budget))}
            for i in range(net.n)
        ]
        doc["network"] = {"e": _frac(oracle_expected_network(net, profile, budget))}
    except BudgetExceeded as exc:
        if args.mc_samples is None:
            raise InputError(f"{exc}; raise --budget or use --mc-samples") from None
        doc = {"exhaustive": False, "reason": str(exc)}
    if args.mc_samples is not None:
        est, err = monte_carlo_expected_network(net, profile, args.mc_samples, args.seed)
        doc["monte_carlo"] = {"samples": args.mc_samples, "seed": args.seed,
                              "estimate": est, "stderr": err}
    _emit(_dump(doc), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        cfg = GeneratorConfig(args.vars, args.dom, args.density, args.tightness, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _emit(_dump(network_to_document(generate(cfg))), args.out)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    try:
        cfg = GeneratorConfig(args.vars, args.dom, args.density, args.tightness, args.seed)
        rows = run_calibrate(cfg, args.k, args.trials, event_vars=args.event_vars,
                             exhaustive=args.exhaustive, budget=args.budget)
    except (ValueError, BudgetExceeded) as exc:
        raise InputError(str(exc)) from None
    _emit(rows_to_csv(rows), args.out)
    if rows:
        n = len(rows)
        mean = lambda xs: sum(xs) / n  # noqa: E731
        print(
            f"trials={n} mean e_pred={mean([r.e_pred for r in rows]):.6g} "
            f"mean e_lower={mean([r.e_lower for r in rows]):.6g} "
            f"mean first_round={float(mean([r.actual_first_round for r in rows])):.6g} "
            f"mean fixpoint={float(mean([r.actual_fixpoint for r in rows])):.6g}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_ac3(args) -> int:
    net = _network(args.network)
    res = ac3(net)
    doc = {
        "wiped_out": res.wiped_out,
        "domains": {nm: dom for nm, dom in zip(net.names, res.domains(net))},
    }
    _emit(_dump(doc), args.out)
    return EXIT_INFEASIBLE if res.wiped_out else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="probcsp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-value probabilities with their lower bounds")
    p.add_argument("--network", required=True)
    p.add_argument("--events", help="JSON removal counts; omitted or empty means no removals")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("propagate", help="run ProbAC to its fixpoint")
    p.add_argument("--network", required=True)
    p.add_argument("--events")
    p.add_argument("--trace", help="write a JSON-lines event log here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("oracle", help="exact enumeration (and optional Monte Carlo) check")
    p.add_argument("--network", required=True)
    p.add_argument("--events")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="largest number of joint removal outcomes to enumerate")
    p.add_argument("--mc-samples", type=int, help="also report a Monte Carlo estimate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate a random network")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--dom", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--tightness", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("calibrate", help="predicted vs observed inconsistency, CSV")
    p.add_argument("--vars", type=int, required=True)
    p.add_argument("--dom", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--tightness", type=float, required=True)
    p.add_argument("--k", type=int, required=True, help="values removed from each event variable")
    p.add_argument("--trials", type=int, required=True, help="trial t uses seed + t")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--event-vars", type=int, default=1, help="variables receiving the k removals")
    p.add_argument("--exhaustive", action="store_true",
                   help="average over every removal outcome instead of sampling one")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("ac3", help="plain AC-3 baseline")
    p.add_argument("--network", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ac3)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"probcsp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
