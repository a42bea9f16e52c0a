"""Scenario loading, run reports and trace auditing.

Everything in a :class:`RunReport` is re-derived from trace records, so a
report can be rebuilt from a JSONL file written by an earlier run.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .domain import Scenario, validate_scenario
from .errors import ReportError, ScenarioParseError, ValidationFailed
from .trace import record_kind

PAYLOAD_TYPES = ("IdentityCheck", "Identity", "Order", "OrderNotice")
WAIT_CLOSING_EVENTS = ("resumed", "replan", "task_failed")


@dataclass
class RobotStats:
    busy_ticks: int = 0
    wait_ticks: int = 0
    idle_ticks: int = 0
    tasks_completed: int = 0
    tasks_failed: int = 0


@dataclass
class TaskResult:
    robot_id: str
    elapsed_ticks: int
    outcome: str


@dataclass
class RunReport:
    strategy: str | None
    makespan_ticks: int
    per_robot: dict[str, RobotStats] = field(default_factory=dict)
    per_task: dict[str, TaskResult] = field(default_factory=dict)
    message_counts: dict[str, int] = field(default_factory=dict)
    plan: dict | None = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compute_report(trace: Iterable[dict[str, Any]]) -> RunReport:
    strategy = None
    roster: list[str] = []
    plan = None
    counts = Counter({t: 0 for t in PAYLOAD_TYPES})
    orders: dict[int, tuple[str, str]] = {}
    notices: list[tuple[int, str, str, int, str]] = []  # tick, robot, task, elapsed, outcome
    waited: Counter[str] = Counter()

    for i, rec in enumerate(trace):
        if not isinstance(rec, dict) or not isinstance(rec.get("tick"), int):
            raise ReportError(i, "record is not an object with an integer 'tick'")
        kind = record_kind(rec)
        try:
            if kind == "message":
                ptype = rec["payload"]["type"]
                if ptype not in PAYLOAD_TYPES:
                    raise ValueError(f"unknown payload type {ptype!r}")
                counts[ptype] += 1
                if ptype == "Order":
                    orders[rec["msg_id"]] = (rec["payload"]["task_id"], rec["to"])
                elif ptype == "OrderNotice":
                    p = rec["payload"]
                    notices.append((rec["tick"], rec["from"], p["task_id"],
                                    int(p["elapsed_ticks"]), p["outcome"]))
            elif kind == "event":
                ev = rec["event"]
                if ev == "run_started" and strategy is None:
                    strategy = rec.get("strategy")
                elif ev == "dispatch_started":
                    strategy = rec["strategy"]
                    roster = list(rec["roster"])
                elif ev == "plan_built":
                    plan = rec["plan"]
                elif ev in WAIT_CLOSING_EVENTS:
                    waited[rec["agent"]] += int(rec["waited_ticks"])
            elif kind == "unknown":
                raise ValueError("unrecognised record shape")
        except (KeyError, TypeError, ValueError) as exc:
            raise ReportError(i, f"malformed {kind} record: {exc}") from None

    makespan = max((n[0] for n in notices), default=0)
    per_robot = {rid: RobotStats() for rid in roster}
    per_task: dict[str, TaskResult] = {}
    for _, rid, tid, elapsed, outcome in notices:
        stats = per_robot.setdefault(rid, RobotStats())
        stats.busy_ticks += elapsed
        if outcome == "Completed":
            stats.tasks_completed += 1
        else:
            stats.tasks_failed += 1
        per_task[tid] = TaskResult(rid, elapsed, outcome)
    for rid, stats in per_robot.items():
        stats.wait_ticks = waited[rid]
        stats.busy_ticks -= stats.wait_ticks
        stats.idle_ticks = makespan - stats.busy_ticks - stats.wait_ticks

    return RunReport(
        strategy=strategy,
        makespan_ticks=makespan,
        per_robot=dict(sorted(per_robot.items())),
        per_task=dict(sorted(per_task.items())),
        message_counts=dict(counts),
        plan=plan,
    )


def audit_trace(trace: Iterable[dict[str, Any]]) -> list[str]:
    """Independent safety and timing audit over a recorded trace.

    Checks every snapshot for shared cells and wall cells (walls come from the
    ``run_started`` record), and every OrderNotice's elapsed time against its
    Order's tick.
    """
    problems: list[str] = []
    walls: set[tuple[int, int]] = set()
    order_tick: dict[int, int] = {}
    for rec in trace:
        kind = record_kind(rec)
        if kind == "event" and rec["event"] == "run_started":
            walls = {tuple(w) for w in rec.get("walls", [])}
        elif kind == "snapshot":
            seen: dict[tuple[int, int], str] = {}
            entities = list(rec["robots"].items()) + list(rec["obstacles"].items())
            for ent, pos in entities:
                pos = tuple(pos)
                if pos in walls:
                    problems.append(f"tick {rec['tick']}: {ent} on wall {pos}")
                if pos in seen:
                    problems.append(f"tick {rec['tick']}: {seen[pos]} and {ent} share {pos}")
                seen[pos] = ent
        elif kind == "message":
            ptype = rec["payload"]["type"]
            if ptype == "Order":
                order_tick[rec["msg_id"]] = rec["tick"]
            elif ptype == "OrderNotice":
                sent = order_tick.get(rec["correlates"])
                want = None if sent is None else rec["tick"] - sent + 1
                if want != rec["payload"]["elapsed_ticks"]:
                    problems.append(
                        f"notice {rec['msg_id']}: elapsed {rec['payload']['elapsed_ticks']} != {want}"
                    )
    return problems


class _DupDict(dict):
    duplicates: list[str]


def _pairs_hook(pairs: list[tuple[str, Any]]) -> dict:
    out: dict[str, Any] = {}
    dups = []
    for k, v in pairs:
        if k in out:
            dups.append(k)
        out[k] = v
    if dups:
        out = _DupDict(out)
        out.duplicates = dups
    return out


def load_scenario(path: str | Path) -> Scenario:
    """Read, parse and validate a scenario JSON file.

    Raises OSError on I/O failure, ScenarioParseError on malformed content and
    ValidationFailed when the scenario breaks an invariant.
    """
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise ScenarioParseError(f"{path}: empty file")
    try:
        doc = json.loads(text, object_pairs_hook=_pairs_hook)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioParseError(f"{path}: top level must be an object")

    violations = []
    tasks = doc.get("tasks", {})
    if isinstance(tasks, _DupDict):
        violations += [f"tasks: duplicate id {k}" for k in tasks.duplicates]
    if isinstance(doc, _DupDict):
        raise ScenarioParseError(f"{path}: duplicate keys {doc.duplicates}")

    for key in ("grid_width", "grid_height", "robots", "tasks", "products"):
        if key not in doc:
            raise ScenarioParseError(f"{path}: missing field {key!r}")
    for key in ("robots", "products", "obstacles", "walls"):
        if not isinstance(doc.get(key, []), list):
            raise ScenarioParseError(f"{path}: field {key!r} must be an array")
    if not isinstance(tasks, dict):
        raise ScenarioParseError(f"{path}: field 'tasks' must be an object keyed by task id")

    try:
        scenario = Scenario.from_dict(doc)
    except KeyError as exc:
        raise ScenarioParseError(f"{path}: missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"{path}: bad value: {exc}") from None

    violations += validate_scenario(scenario)
    if violations:
        raise ValidationFailed(violations)
    return scenario


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n", encoding="utf-8")


def robots_with_accounting_gaps(report: RunReport) -> list[str]:
    """Robots whose busy + wait + idle does not add up to the makespan."""
    return [
        rid for rid, s in report.per_robot.items()
        if s.busy_ticks + s.wait_ticks + s.idle_ticks != report.makespan_ticks
        or min(s.busy_ticks, s.wait_ticks, s.idle_ticks) < 0
    ]


def summarize_orders(trace: Iterable[dict[str, Any]]) -> list[tuple[int, str, str]]:
    """(tick, task_id, robot_id) for every Order in the trace, in send order."""
    return [
        (r["tick"], r["payload"]["task_id"], r["to"])
        for r in trace
        if record_kind(r) == "message" and r["payload"]["type"] == "Order"
    ]


def messages_by_type(trace: Iterable[dict[str, Any]]) -> dict[str, list[dict]]:
    out: dict[str, list[dict]] = defaultdict(list)
    for r in trace:
        if record_kind(r) == "message":
            out[r["payload"]["type"]].append(r)
    return dict(out)
