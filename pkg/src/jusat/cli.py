"""Command-line front end.

Subcommands:

    jusat analyze    --logic FILE [--output text|json]
    jusat sat        --logic FILE --formula TEXT [--mode base|improved] ...
    jusat prove      --logic FILE --agent N --term TEXT --formula TEXT
    jusat oracle     --logic FILE --formula TEXT [--max-worlds K]
    jusat crosscheck --logic FILE --formula TEXT ...

Exit codes: 0 satisfiable / derivable / checks consistent, 1 the
negative verdict, 2 resource limits hit, 3 usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import List, Optional

from . import agents, models, star, syntax, tableau
from .logic import LogicError, load_logic_file
from .syntax import ParseError, Sum, parse_formula, parse_term

EXIT_YES = 0
EXIT_NO = 1
EXIT_RESOURCE = 2
EXIT_USAGE = 3


def _analysis_dict(analysis, report):
    def cls(c):
        return sorted(c)

    return {
        "n": analysis.spec.n,
        "S": sorted(analysis.S),
        "R": sorted(analysis.R),
        "C_F": sorted(analysis.C_F),
        "P_C": [cls(c) for c in analysis.P_C],
        "P": [cls(c) for c in analysis.P],
        "M_C": {
            str(cls(k)): [cls(c) for c in v] for k, v in analysis.MC.items()
        },
        "N": {str(j): sorted(v) for j, v in sorted(analysis.N.items())},
        "v_classes": [cls(c) for c in analysis.v_classes()],
        "classification": report.as_dict(),
    }


def _stats_dict(stats):
    return {
        "branches_explored": stats.branches_explored,
        "rule_applications": stats.rule_applications,
        "max_prefix_len": stats.max_prefix_len,
        "max_boxes": stats.max_boxes,
        "max_entries": stats.max_entries,
    }


def _emit(payload, args):
    if args.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        _emit_text(payload)


def _emit_text(payload, indent=0):
    pad = "  " * indent
    if isinstance(payload, dict):
        for k, v in payload.items():
            if isinstance(v, (dict, list)):
                print(f"{pad}{k}:")
                _emit_text(v, indent + 1)
            else:
                print(f"{pad}{k}: {v}")
    elif isinstance(payload, list):
        for v in payload:
            _emit_text(v, indent)
    else:
        print(f"{pad}{payload}")


def _limits_from_args(spec, analysis, formula, args):
    limits = tableau.default_limits(spec, analysis, formula)
    if args.prefix_cap is not None:
        limits.prefix_len = args.prefix_cap
    if args.box_cap is not None:
        limits.box_len = args.box_cap
    if args.node_cap is not None:
        limits.max_entries = args.node_cap
    if args.time_cap:
        limits.deadline = time.monotonic() + args.time_cap
    return limits


def cmd_analyze(args) -> int:
    spec = load_logic_file(args.logic)
    analysis = agents.analyze(spec)
    report = agents.classify(analysis, spec)
    if args.output == "json":
        _emit(_analysis_dict(analysis, report), args)
    else:
        print(agents.render_analysis(analysis, report))
    return EXIT_YES


def cmd_sat(args) -> int:
    spec = load_logic_file(args.logic)
    analysis = agents.analyze(spec)
    formula = parse_formula(args.formula)
    limits = _limits_from_args(spec, analysis, formula, args)
    trace: Optional[List[str]] = [] if args.trace else None
    verdict = tableau.decide(
        spec, formula, mode=args.mode, limits=limits, analysis=analysis,
        trace=trace,
    )
    if trace:
        for line in trace:
            print(f"# {line}", file=sys.stderr)
    payload = {"verdict": verdict.verdict, "stats": _stats_dict(verdict.stats)}
    if isinstance(verdict, tableau.Satisfiable):
        payload["model"] = models.model_to_text(verdict.model)
        _emit(payload, args)
        return EXIT_YES
    if isinstance(verdict, tableau.ResourceExceeded):
        payload["reason"] = verdict.reason
        _emit(payload, args)
        return EXIT_RESOURCE
    _emit(payload, args)
    return EXIT_NO


def cmd_prove(args) -> int:
    spec = load_logic_file(args.logic)
    term = parse_term(args.term)
    body = parse_formula(args.formula)
    agent = args.agent
    if agent not in spec.agents():
        raise LogicError(f"agent {agent} outside 1..{spec.n}")
    plus_free = not any(isinstance(s, Sum) for s in syntax.subterms(term))
    if plus_free and spec.cs.is_schematically_injective():
        verdict = star.prove_plus_free(spec, agent, term, body)
        method = "plus-free fast path"
    else:
        verdict = star.prove_justified(spec, agent, term, body)
        method = "general search"
    payload = {"derivable": verdict, "method": method}
    _emit(payload, args)
    return EXIT_YES if verdict else EXIT_NO


def cmd_oracle(args) -> int:
    spec = load_logic_file(args.logic)
    analysis = agents.analyze(spec)
    formula = parse_formula(args.formula)
    model, exhausted = models.brute_force_sat_detail(
        spec, analysis, formula, args.max_worlds, budget=args.budget
    )
    payload = {"exhausted": exhausted}
    if model is not None:
        payload["verdict"] = "SAT"
        payload["model"] = models.model_to_text(model)
        _emit(payload, args)
        return EXIT_YES
    payload["verdict"] = "no model found"
    _emit(payload, args)
    return EXIT_NO if exhausted else EXIT_RESOURCE


def cmd_crosscheck(args) -> int:
    spec = load_logic_file(args.logic)
    analysis = agents.analyze(spec)
    formula = parse_formula(args.formula)
    limits = _limits_from_args(spec, analysis, formula, args)
    verdict = tableau.decide(
        spec, formula, mode=args.mode, limits=limits, analysis=analysis
    )
    model, exhausted = models.brute_force_sat_detail(
        spec, analysis, formula, args.max_worlds, budget=args.budget
    )
    payload = {
        "tableau": verdict.verdict,
        "oracle": "SAT" if model is not None else "no model found",
        "oracle_exhausted": exhausted,
    }
    if isinstance(verdict, tableau.ResourceExceeded):
        payload["consistent"] = "not comparable"
        _emit(payload, args)
        return EXIT_RESOURCE
    if model is not None and isinstance(verdict, tableau.Unsatisfiable):
        payload["consistent"] = False
        _emit(payload, args)
        return EXIT_NO
    payload["consistent"] = True
    _emit(payload, args)
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jusat",
        description="satisfiability and derivability workbench for "
        "multi-agent justification logics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formula=True):
        p.add_argument("--logic", required=True, help="logic description file")
        p.add_argument("--output", choices=("text", "json"), default="text")
        if formula:
            p.add_argument("--formula", required=True)

    def limit_flags(p):
        p.add_argument("--mode", choices=("base", "improved"), default="improved")
        p.add_argument("--prefix-cap", type=int, default=None)
        p.add_argument("--box-cap", type=int, default=None)
        p.add_argument("--node-cap", type=int, default=None)
        p.add_argument("--time-cap", type=float, default=30.0,
                       help="seconds; 0 disables")

    p = sub.add_parser("analyze", help="agent interaction analysis")
    common(p, formula=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sat", help="tableau satisfiability")
    common(p)
    limit_flags(p)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("prove", help="derivability of [term]_agent formula")
    common(p)
    p.add_argument("--agent", type=int, required=True)
    p.add_argument("--term", required=True)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("oracle", help="bounded brute-force satisfiability")
    common(p)
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("crosscheck", help="compare tableau and oracle")
    common(p)
    limit_flags(p)
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=cmd_crosscheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, LogicError, models.ModelError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
