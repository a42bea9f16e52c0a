"""Command-line entry point: ``amrmas run | validate | compare``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agents import DEFAULT_TICK_LIMIT, run_simulation
from .dispatch import create_strategy, designations
from .errors import AmrMasError, UnknownStrategy, ValidationFailed
from .messaging import conversation_check
from .report import audit_trace, load_scenario
from .trace import write_jsonl


def _designation(value: str) -> str:
    try:
        create_strategy(value)
    except UnknownStrategy as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amrmas", description="Master/Robot fleet dispatch simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one scenario with one strategy")
    run.add_argument("--scenario", required=True, type=Path)
    run.add_argument("--strategy", required=True, type=_designation,
                     help=f"one of: {', '.join(designations())}")
    run.add_argument("--trace", type=Path, default=Path("trace.jsonl"))
    run.add_argument("--report", type=Path, default=Path("report.json"))
    run.add_argument("--snapshots", action="store_true", help="record per-tick world snapshots")
    run.add_argument("--tick-limit", type=int, default=DEFAULT_TICK_LIMIT)

    val = sub.add_parser("validate", help="check a scenario file")
    val.add_argument("--scenario", required=True, type=Path)

    cmp_ = sub.add_parser("compare", help="run every strategy and tabulate makespans")
    cmp_.add_argument("--scenario", required=True, type=Path)
    cmp_.add_argument("--tick-limit", type=int, default=DEFAULT_TICK_LIMIT)
    return parser


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    trace, report = run_simulation(scenario, args.strategy, tick_limit=args.tick_limit,
                                   snapshots=args.snapshots)
    write_jsonl(trace, args.trace)
    args.report.write_text(report.to_json() + "\n", encoding="utf-8")
    problems = conversation_check(trace) + audit_trace(trace)
    for p in problems:
        print(f"protocol: {p}", file=sys.stderr)
    done = sum(1 for t in report.per_task.values() if t.outcome == "Completed")
    print(f"{args.strategy}: makespan {report.makespan_ticks} ticks, "
          f"{done}/{len(report.per_task)} tasks completed")
    print(f"trace -> {args.trace}, report -> {args.report}")
    return 1 if problems else 0


def _cmd_validate(args) -> int:
    try:
        load_scenario(args.scenario)
    except ValidationFailed as exc:
        for v in exc.violations:
            print(v)
        return 1
    print("ok")
    return 0


def _cmd_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    rows = []
    for name in designations():
        _, report = run_simulation(scenario, name, tick_limit=args.tick_limit)
        done = sum(1 for t in report.per_task.values() if t.outcome == "Completed")
        rows.append((name, report.makespan_ticks, done, len(report.per_task),
                     report.message_counts["Order"]))
    print(f"{'strategy':<12} {'makespan':>9} {'completed':>10} {'orders':>7}")
    for name, makespan, done, total, orders in rows:
        print(f"{name:<12} {makespan:>9} {f'{done}/{total}':>10} {orders:>7}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": _cmd_run, "validate": _cmd_validate, "compare": _cmd_compare}[args.command]
    try:
        return handler(args)
    except ValidationFailed as exc:
        for v in exc.violations:
            print(f"invalid: {v}", file=sys.stderr)
        return 1
    except (AmrMasError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
