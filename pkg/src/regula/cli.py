"""Command-line front end.

Subcommands: solve (enumerate admissible plans), validate (check a plan
file), consequences (forced/possible table), induce (exam plan -> study
plan), serve (start the HTTP service).  Usage and input errors exit with
status 2; validate exits 1 for an inadmissible plan.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .dsl import (
    ParseError, parse_exam_plan, parse_instance, parse_study_plan,
    serialize_plan,
)
from .model import Assumption, ExamPlan, StudyPlan, check_wellformed
from .semantics import induce, validate_exam_plan, validate_study_plan
from .solver import SearchBudgetExceeded, SolveRequest, consequences, solve


def _parse_assumption(text: str, polarity: str) -> Assumption:
    name, sep, sem = text.partition("@")
    if not sep or not sem.isdigit():
        raise argparse.ArgumentTypeError(
            f"expected MODULE@SEM, found {text!r}")
    return Assumption(name, int(sem), polarity)


def _pairs(plan: StudyPlan | ExamPlan) -> str:
    out = []
    for i, sem in enumerate(plan.semesters, start=1):
        out += [f"({m},{i})" for m in sorted(sem)]
    return " ".join(out)


def _load_instance(path: str):
    text = Path(path).read_text()
    reg, exam = parse_instance(text)
    report = check_wellformed(reg, exam)
    if not report.admissible:
        raise ParseError("instance is not well-formed:\n" + report.summary())
    return reg, exam


def _request(args, reg, exam) -> SolveRequest:
    assumptions = tuple(
        [_parse_assumption(t, "assigned") for t in args.assume]
        + [_parse_assumption(t, "excluded") for t in args.exclude])
    return SolveRequest(
        reg, args.n, exam=exam, assumptions=assumptions,
        model_limit=args.models if getattr(args, "models", 0) else None,
        mode=getattr(args, "mode", "study"),
        seed=args.seed, node_budget=args.node_budget)


def _cmd_solve(args) -> int:
    reg, exam = _load_instance(args.instance)
    if args.mode == "exam" and exam is None:
        print("error: the instance declares no examination tasks", file=sys.stderr)
        return 2
    req = _request(args, reg, exam if args.mode == "exam" else None)
    outcome = "SATISFIABLE"
    try:
        solutions = solve(req)
    except SearchBudgetExceeded as exc:
        solutions = exc.partial
        outcome = "UNKNOWN"
    for k, solution in enumerate(solutions, start=1):
        print(f"Answer: {k}")
        shown = solution[0] if req.mode == "exam" else solution
        if args.format == "plan":
            print(serialize_plan(shown), end="")
        else:
            print(_pairs(shown))
    if not solutions and outcome == "SATISFIABLE":
        outcome = "UNSATISFIABLE"
    print(outcome)
    if outcome == "UNKNOWN":
        print(f"(search budget of {args.node_budget} nodes exhausted "
              f"after {len(solutions)} answer(s))")
    return 0


def _cmd_validate(args) -> int:
    reg, exam = _load_instance(args.instance)
    if (args.plan is None) == (args.exam_plan is None):
        print("error: validate needs exactly one of --plan / --exam-plan",
              file=sys.stderr)
        return 2
    if args.plan is not None:
        plan = parse_study_plan(Path(args.plan).read_text(), reg)
        report = validate_study_plan(reg, plan)
    else:
        if exam is None:
            print("error: the instance declares no examination tasks",
                  file=sys.stderr)
            return 2
        eplan = parse_exam_plan(Path(args.exam_plan).read_text(), exam)
        report = validate_exam_plan(reg, exam, eplan)
    print(report.summary())
    return 0 if report.admissible else 1


def _cmd_consequences(args) -> int:
    reg, exam = _load_instance(args.instance)
    req = _request(args, reg, None)
    try:
        report = consequences(req)
    except SearchBudgetExceeded:
        print("UNKNOWN")
        print("(search budget exhausted before satisfiability was decided)")
        return 0
    if not report.satisfiable:
        print("UNSATISFIABLE")
        return 0
    print("SATISFIABLE" if report.complete else "SATISFIABLE (incomplete)")
    for i in range(args.n):
        print(f"semester {i + 1}")
        print(f"  forced:   {' '.join(sorted(report.forced[i]))}")
        print(f"  possible: {' '.join(sorted(report.possible[i]))}")
        if report.unknown and report.unknown[i]:
            print(f"  unknown:  {' '.join(sorted(report.unknown[i]))}")
    return 0


def _cmd_induce(args) -> int:
    reg, exam = _load_instance(args.instance)
    if exam is None:
        print("error: the instance declares no examination tasks", file=sys.stderr)
        return 2
    eplan = parse_exam_plan(Path(args.exam_plan).read_text(), exam)
    print(serialize_plan(induce(eplan, exam, reg.modules)), end="")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_common(sub, *, horizon: bool) -> None:
    sub.add_argument("-i", "--instance", required=True,
                     help="regulation file (.reg)")
    if horizon:
        sub.add_argument("-n", type=int, required=True,
                         help="number of semesters")
        sub.add_argument("--assume", action="append", default=[],
                         metavar="MODULE@SEM",
                         help="require the module in that semester (repeatable)")
        sub.add_argument("--exclude", action="append", default=[],
                         metavar="MODULE@SEM",
                         help="forbid the module in that semester (repeatable)")
        sub.add_argument("--seed", type=int, default=None,
                         help="shuffle the enumeration order")
        sub.add_argument("--node-budget", type=int, default=None,
                         help="abort the search after this many nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regula",
        description="Reason about study regulations: enumerate, validate, "
                    "and interactively build study and examination plans.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("solve", help="enumerate admissible plans")
    _add_common(p, horizon=True)
    p.add_argument("--models", type=int, default=1,
                   help="number of plans to print (0 = all)")
    p.add_argument("--mode", choices=("study", "exam"), default="study")
    p.add_argument("--format", choices=("pairs", "plan"), default="pairs")
    p.set_defaults(func=_cmd_solve)

    p = subs.add_parser("validate", help="check a plan file against the instance")
    _add_common(p, horizon=False)
    p.add_argument("-p", "--plan", help="study plan file")
    p.add_argument("-e", "--exam-plan", help="examination plan file")
    p.set_defaults(func=_cmd_validate)

    p = subs.add_parser("consequences",
                        help="per-semester forced/possible assignments")
    _add_common(p, horizon=True)
    p.set_defaults(func=_cmd_consequences)

    p = subs.add_parser("induce",
                        help="derive the study plan an examination plan induces")
    _add_common(p, horizon=False)
    p.add_argument("-e", "--exam-plan", required=True,
                   help="examination plan file")
    p.set_defaults(func=_cmd_induce)

    p = subs.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
