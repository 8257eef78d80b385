"""Command-line interface.

Exit codes: 0 success (or verdict true), 1 verdict false, 2 usage/parse
error, 3 search budget exceeded. Every command can emit a machine-readable
JSON document with ``--json``; utilities are always rendered as exact
decimal or rational strings, never binary floats.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import golden, oracle, reduction, two_agent
from .engine import run_sequential_allocation
from .instance_io import InstanceParseError, parse_instance, serialize_instance
from .kernel import BACKEND
from .model import ValidationError, bundle_utility, make_lexicographic_utilities
from .oracle import BudgetExceededError
from .reduction import FormulaError

EXIT_OK = 0
EXIT_VERDICT_FALSE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Report:
    """One structured document per run; timing excluded from determinism."""

    def __init__(self, command: list[str], input_path: str | None):
        self.t0 = time.perf_counter()
        self.doc = {"command": command, "results": {}}
        if input_path is not None:
            self.doc["input"] = input_path
            self.doc["input_sha256"] = _digest(input_path)

    def emit(self, args, text_lines: list[str]) -> None:
        self.doc["elapsed_seconds"] = round(time.perf_counter() - self.t0, 6)
        if getattr(args, "json", False):
            print(json.dumps(self.doc, indent=2, sort_keys=True))
        else:
            for line in text_lines:
                print(line)


def _load_instance(path: str):
    return parse_instance(Path(path).read_text())


def cmd_allocate(args) -> int:
    report = Report(["allocate", args.instance], args.instance)
    inst, _ = _load_instance(args.instance)
    alloc = run_sequential_allocation(inst)
    report.doc["results"] = {
        "bundles": {a: sorted(b) for a, b in alloc.bundles.items()},
        "trace": [[stage, agent, item] for stage, agent, item in alloc.trace],
    }
    lines = ["trace:"]
    lines += [f"  stage {s:>3}  {a:>10}  takes {o}" for s, a, o in alloc.trace]
    lines += ["bundles:"]
    lines += [f"  {a}: {{{', '.join(sorted(alloc.bundles[a]))}}}" for a in inst.agents]
    report.emit(args, lines)
    return EXIT_OK


def cmd_best_response(args) -> int:
    report = Report(["best-response", args.instance, args.agent, args.mode], args.instance)
    inst, utility = _load_instance(args.instance)
    agent = args.agent
    if agent not in inst.agents:
        raise ValidationError([f"unknown agent {agent}"])
    if utility is None or agent not in utility.values:
        utility = make_lexicographic_utilities(inst.preferences)
        report.doc["results"]["utilities"] = "lexicographic (none supplied)"

    lines: list[str] = []
    if args.mode == "two-agent":
        rep, bundle, value = two_agent.best_response(inst, utility, agent)
        report.doc["results"].update(
            {"report": list(rep), "bundle": sorted(bundle), "utility": _frac(value)}
        )
        lines += [
            "report : " + " ".join(rep),
            "bundle : {" + ", ".join(sorted(bundle)) + "}",
            "utility: " + _frac(value),
        ]
    elif args.mode == "oracle":
        res = oracle.brute_force_best_response(
            inst, utility, agent, node_budget=args.budget
        )
        bundles = [sorted(b) for b in res.optimal_bundles]
        witnesses = {
            ",".join(sorted(b)): list(res.witness_reports[b]) for b in res.optimal_bundles
        }
        report.doc["results"].update(
            max_utility=_frac(res.max_utility),
            optimal_bundles=bundles,
            witness_reports=witnesses,
        )
        lines += [f"max utility: {_frac(res.max_utility)}"]
        for b in res.optimal_bundles:
            lines += [
                "optimal bundle {" + ", ".join(sorted(b)) + "} via report "
                + " ".join(res.witness_reports[b])
            ]
    else:  # refuted-greedy
        bundle = oracle.refuted_greedy_best_response(inst, agent, node_budget=args.budget)
        value = bundle_utility(utility, agent, bundle)
        report.doc["results"].update(bundle=sorted(bundle), utility=_frac(value))
        lines += [
            "bundle : {" + ", ".join(sorted(bundle)) + "}",
            "utility: " + _frac(value),
        ]
    report.emit(args, lines)
    return EXIT_OK


def cmd_nash_verify(args) -> int:
    report = Report(["nash-verify", args.instance], args.instance)
    inst, utility = _load_instance(args.instance)
    if utility is None or set(utility.values) != set(inst.agents):
        raise ValidationError(["nash-verify requires utilities for every agent"])
    evidence = two_agent.nash_evidence(inst, utility)
    verdict = not any(e.can_improve for e in evidence)
    report.doc["results"] = {
        "equilibrium": verdict,
        "agents": {
            e.agent: {
                "current_bundle": sorted(e.current_bundle),
                "current_utility": _frac(e.current_utility),
                "best_response_bundle": sorted(e.best_response_bundle),
                "best_response_utility": _frac(e.best_response_utility),
                "can_improve": e.can_improve,
            }
            for e in evidence
        },
    }
    lines = [f"equilibrium: {'yes' if verdict else 'no'}"]
    for e in evidence:
        lines.append(
            f"  agent {e.agent}: holds {{{', '.join(sorted(e.current_bundle))}}}"
            f" worth {_frac(e.current_utility)}; best response"
            f" {{{', '.join(sorted(e.best_response_bundle))}}}"
            f" worth {_frac(e.best_response_utility)}"
            + (" (improves)" if e.can_improve else "")
        )
    report.emit(args, lines)
    return EXIT_OK if verdict else EXIT_VERDICT_FALSE


def cmd_reduce(args) -> int:
    report = Report(["reduce", args.formula, args.out], args.formula)
    formula = reduction.parse_formula(Path(args.formula).read_text())
    out = reduction.build_instance(formula)
    instance_path = Path(args.out + ".instance")
    registry_path = Path(args.out + ".registry.json")
    instance_path.write_text(serialize_instance(out.instance, out.utility))
    registry_doc = json.loads(out.registry.to_json())
    registry_doc["target_utility"] = _frac(out.target)
    registry_path.write_text(json.dumps(registry_doc, indent=2, sort_keys=True))
    report.doc["results"] = {
        "agents": len(out.instance.agents),
        "items": len(out.instance.items),
        "stages": len(out.instance.sequence),
        "target_utility": _frac(out.target),
        "instance_file": str(instance_path),
        "registry_file": str(registry_path),
    }
    report.emit(
        args,
        [
            f"wrote {instance_path} and {registry_path}",
            f"{len(out.instance.agents)} agents, {len(out.instance.items)} items,"
            f" {len(out.instance.sequence)} stages, target {_frac(out.target)}",
        ],
    )
    return EXIT_OK


def _parse_assignment(text: str, num_vars: int) -> dict[int, bool]:
    assignment: dict[int, bool] = {}
    for part in text.split(","):
        name, _, value = part.strip().partition("=")
        if not name.startswith("x") or value.upper() not in ("T", "F"):
            raise ValidationError([f"bad assignment entry {part!r}, expected e.g. x1=T"])
        assignment[int(name[1:])] = value.upper() == "T"
    missing = [v for v in range(1, num_vars + 1) if v not in assignment]
    if missing:
        raise ValidationError([f"assignment missing variables {missing}"])
    return assignment


def cmd_verify_reduction(args) -> int:
    report = Report(["verify-reduction", args.formula], args.formula)
    formula = reduction.parse_formula(Path(args.formula).read_text())
    out = reduction.build_instance(formula)
    if args.patterns:
        pattern_report = reduction.verify_choice_patterns(out, max_patterns=args.budget)
        if not pattern_report.sat_enumeration_agrees:
            raise RuntimeError("pattern verdict disagrees with direct SAT enumeration")
        report.doc["results"] = {
            "satisfiable": pattern_report.satisfiable,
            "patterns_checked": len(pattern_report.outcomes),
            "patterns_meeting_target": [
                "".join(o.kinds) for o in pattern_report.outcomes if o.meets_target
            ],
            "sat_enumeration_agrees": True,
        }
        report.emit(
            args,
            [
                f"checked {len(pattern_report.outcomes)} choice patterns",
                f"satisfiable: {'yes' if pattern_report.satisfiable else 'no'}"
                " (agrees with direct enumeration)",
            ],
        )
        return EXIT_OK if pattern_report.satisfiable else EXIT_VERDICT_FALSE

    assignment = _parse_assignment(args.assignment, formula.num_vars)
    fwd = reduction.verify_forward(out, assignment)
    report.doc["results"] = {
        "assignment": {f"x{v}": ("T" if b else "F") for v, b in assignment.items()},
        "utility": _frac(fwd.utility),
        "target": _frac(out.target),
        "meets_target": fwd.meets_target,
        "manipulator_bundle": sorted(fwd.manipulator_bundle),
        "trace": [[s, a, o] for s, a, o in fwd.allocation.trace],
    }
    lines = [
        f"utility {_frac(fwd.utility)} vs target {_frac(out.target)}",
        f"meets target: {'yes' if fwd.meets_target else 'no'}",
    ]
    report.emit(args, lines)
    return EXIT_OK if fwd.meets_target else EXIT_VERDICT_FALSE


def cmd_examples(args) -> int:
    report = Report(["examples"], None)
    results = golden.run_golden_checks()
    ok = all(passed for _, passed, _ in results)
    report.doc["results"] = {
        name: {"passed": passed, **({"detail": detail} if not passed else {})}
        for name, passed, detail in results
    }
    lines = [
        f"{'PASS' if passed else 'FAIL'} {name}" + ("" if passed else f"  {detail}")
        for name, passed, detail in results
    ]
    lines.append("all green" if ok else "golden divergence detected")
    report.emit(args, lines)
    return EXIT_OK if ok else EXIT_VERDICT_FALSE


def cmd_bench(args) -> int:
    from .benchmark import run_benchmark

    run_benchmark(repeats=args.repeat)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqalloc",
        description=f"sequential allocation toolkit (kernel backend: {BACKEND})",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("allocate", help="run sequential allocation on an instance file")
    p.add_argument("instance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_allocate)

    p = sub.add_parser("best-response", help="compute a best response for one agent")
    p.add_argument("instance")
    p.add_argument("--agent", required=True)
    p.add_argument(
        "--mode", choices=["two-agent", "oracle", "refuted-greedy"], default="two-agent"
    )
    p.add_argument("--budget", type=int, default=oracle.DEFAULT_NODE_BUDGET)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_best_response)

    p = sub.add_parser("nash-verify", help="verify a two-agent pure Nash equilibrium")
    p.add_argument("instance")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_nash_verify)

    p = sub.add_parser("reduce", help="compile a restricted 3-CNF formula to an instance")
    p.add_argument("formula")
    p.add_argument("--out", required=True, help="output prefix for .instance and .registry.json")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("verify-reduction", help="replay assignments through a compiled formula")
    p.add_argument("formula")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--assignment", help="e.g. x1=T,x2=F,x3=F")
    group.add_argument("--patterns", action="store_true", help="enumerate all choice patterns")
    p.add_argument("--budget", type=int, default=65536)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_verify_reduction)

    p = sub.add_parser("examples", help="run all built-in golden checks")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_examples)

    p = sub.add_parser("bench", help="compare the compiled and pure-Python kernels")
    p.add_argument("--repeat", type=int, default=200)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (InstanceParseError, ValidationError, FormulaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceededError, reduction.BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
