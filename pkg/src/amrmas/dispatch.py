"""Task-dispatching strategies and the designation-keyed factory.

Two strategies ship with the package:

``sequential``
    Walks the task list in order and hands each task to an idle capable robot,
    blocking on the first task that has no idle capable robot.

``balanced``
    Builds one queue per rostered robot up front. Tasks only one robot can do
    go to that robot first; the rest are spread longest-first onto the
    compatible queue with the least estimated load.

New strategies subclass :class:`DispatchStrategy` and register themselves with
:func:`register_strategy`; nothing else needs to change.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from math import ceil
from typing import Callable, Mapping, Sequence

from .domain import Cell, RobotProfile, TaskKind, TaskSpec
from .errors import NoCapableRobot, UnknownStrategy, Unreachable
from .world import WorldStatics, distances_from, shortest_path


@dataclass
class RosterEntry:
    robot_id: str
    capabilities: frozenset[TaskKind]
    busy_with: str | None = None

    @property
    def idle(self) -> bool:
        return self.busy_with is None

    def can_do(self, task: TaskSpec) -> bool:
        return task.kind in self.capabilities


@dataclass(frozen=True)
class Assignment:
    task_id: str
    robot_id: str
    phase: int
    # Load of every compatible queue just before this assignment.
    loads_before: tuple[tuple[str, int], ...]


@dataclass
class QueuePlan:
    queues: dict[str, list[str]]
    estimated_load: dict[str, int]
    log: list[Assignment] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "queues": {rid: list(q) for rid, q in sorted(self.queues.items())},
            "estimated_load": dict(sorted(self.estimated_load.items())),
            "log": [
                {
                    "task_id": a.task_id,
                    "robot_id": a.robot_id,
                    "phase": a.phase,
                    "loads_before": {rid: load for rid, load in a.loads_before},
                }
                for a in self.log
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Dispatch:
    task_id: str
    robot_id: str


@dataclass(frozen=True)
class Wait:
    pass


@dataclass(frozen=True)
class Done:
    pass


SequentialAction = Dispatch | Wait | Done


def estimate_task_ticks(task: TaskSpec, robot: RobotProfile, world: WorldStatics) -> int:
    """Static-grid estimate of how long ``robot`` needs for ``task`` from its home cell."""
    to_pickup = len(shortest_path(world, robot.home, task.pickup))
    to_dropoff = len(shortest_path(world, task.pickup, task.dropoff))
    return ceil(to_pickup / robot.speed) + ceil(to_dropoff / robot.speed) + task.handling_ticks


def estimate_table(
    tasks: Sequence[TaskSpec],
    robots: Sequence[RobotProfile],
    world: WorldStatics,
) -> dict[tuple[str, str], int]:
    """Estimates for every (task, capable robot) pair.

    Same values as :func:`estimate_task_ticks`, but one breadth-first sweep
    per distinct source cell instead of one search per pair.
    """
    fields: dict[Cell, dict[Cell, int]] = {}

    def dist(a: Cell, b: Cell) -> int:
        if a not in fields:
            fields[a] = distances_from(world, a)
        try:
            return fields[a][b]
        except KeyError:
            raise Unreachable(b) from None

    table = {}
    for t in tasks:
        for r in robots:
            if t.kind in r.capabilities:
                table[(t.id, r.id)] = (
                    ceil(dist(r.home, t.pickup) / r.speed)
                    + ceil(dist(t.pickup, t.dropoff) / r.speed)
                    + t.handling_ticks
                )
    return table


def plan_balanced(
    tasks: Sequence[TaskSpec],
    roster: Sequence[RosterEntry],
    estimates: Mapping[tuple[str, str], int],
) -> QueuePlan:
    capable = {t.id: sorted(r.robot_id for r in roster if r.can_do(t)) for t in tasks}
    for t in tasks:
        if not capable[t.id]:
            raise NoCapableRobot(t.id)

    plan = QueuePlan(
        queues={r.robot_id: [] for r in roster},
        estimated_load={r.robot_id: 0 for r in roster},
    )

    def assign(t: TaskSpec, rid: str, phase: int) -> None:
        before = tuple((c, plan.estimated_load[c]) for c in capable[t.id])
        plan.queues[rid].append(t.id)
        plan.estimated_load[rid] += estimates[(t.id, rid)]
        plan.log.append(Assignment(t.id, rid, phase, before))

    for t in tasks:
        if len(capable[t.id]) == 1:
            assign(t, capable[t.id][0], 1)

    shared = [(i, t) for i, t in enumerate(tasks) if len(capable[t.id]) > 1]

    def mean_estimate(t: TaskSpec) -> float:
        robots = capable[t.id]
        return sum(estimates[(t.id, r)] for r in robots) / len(robots)

    shared.sort(key=lambda it: (-mean_estimate(it[1]), it[0]))
    for _, t in shared:
        rid = min(capable[t.id], key=lambda r: (plan.estimated_load[r], r))
        assign(t, rid, 2)
    return plan


def next_sequential_action(
    tasks: Sequence[TaskSpec],
    roster: Sequence[RosterEntry],
    completed: set[str] | frozenset[str],
    in_flight: set[str] | frozenset[str],
) -> SequentialAction:
    for t in tasks:
        if t.id in completed or t.id in in_flight:
            continue
        capable = [r for r in roster if r.can_do(t)]
        if not capable:
            raise NoCapableRobot(t.id)
        idle = sorted(r.robot_id for r in capable if r.idle)
        if idle:
            return Dispatch(t.id, idle[0])
        return Wait()
    if all(t.id in completed for t in tasks):
        return Done()
    return Wait()


@dataclass
class DispatchBook:
    """The Master's mutable bookkeeping that strategies read from."""

    order: list[str]
    queues: dict[str, list[str]] = field(default_factory=dict)
    in_flight: set[str] = field(default_factory=set)
    completed: set[str] = field(default_factory=set)
    failed: set[str] = field(default_factory=set)

    @property
    def terminal(self) -> set[str]:
        return self.completed | self.failed


class DispatchStrategy(ABC):
    designation: str = ""
    uses_estimates: bool = False

    def prepare(
        self,
        tasks: Sequence[TaskSpec],
        roster: Sequence[RosterEntry],
        estimates: Mapping[tuple[str, str], int],
    ) -> QueuePlan | None:
        return None

    @abstractmethod
    def next_dispatches(
        self,
        tasks: Mapping[str, TaskSpec],
        book: DispatchBook,
        roster: Sequence[RosterEntry],
    ) -> list[Dispatch]:
        """Orders to send now. Must not mutate its arguments."""

    def claim(self, book: DispatchBook, dispatch: Dispatch) -> None:
        """Record that ``dispatch`` was sent."""

    @abstractmethod
    def requeue(self, book: DispatchBook, task_id: str, robot_id: str) -> None:
        """Put a failed task back in line for its one retry."""

    @abstractmethod
    def has_pending(self, book: DispatchBook) -> bool:
        ...


_REGISTRY: dict[str, Callable[[], DispatchStrategy]] = {}


def register_strategy(designation: str):
    def decorator(cls):
        cls.designation = designation
        _REGISTRY[designation] = cls
        return cls

    return decorator


def designations() -> list[str]:
    return list(_REGISTRY)


def create_strategy(designation: str) -> DispatchStrategy:
    try:
        factory = _REGISTRY[designation]
    except KeyError:
        raise UnknownStrategy(designation, designations()) from None
    return factory()


@register_strategy("sequential")
class SequentialStrategy(DispatchStrategy):
    def next_dispatches(self, tasks, book, roster):
        view = [RosterEntry(r.robot_id, r.capabilities, r.busy_with) for r in roster]
        in_flight = set(book.in_flight)
        ordered = [tasks[tid] for tid in book.order]
        out: list[Dispatch] = []
        while True:
            action = next_sequential_action(ordered, view, book.terminal, in_flight)
            if not isinstance(action, Dispatch):
                return out
            out.append(action)
            in_flight.add(action.task_id)
            for r in view:
                if r.robot_id == action.robot_id:
                    r.busy_with = action.task_id

    def requeue(self, book, task_id, robot_id):
        book.order.remove(task_id)
        book.order.insert(0, task_id)

    def has_pending(self, book):
        return any(t not in book.terminal and t not in book.in_flight for t in book.order)


@register_strategy("balanced")
class BalancedStrategy(DispatchStrategy):
    uses_estimates = True

    def prepare(self, tasks, roster, estimates):
        return plan_balanced(tasks, roster, estimates)

    def next_dispatches(self, tasks, book, roster):
        out = []
        for r in sorted(roster, key=lambda e: e.robot_id):
            queue = book.queues.get(r.robot_id)
            if r.idle and queue:
                out.append(Dispatch(queue[0], r.robot_id))
        return out

    def claim(self, book, dispatch):
        book.queues[dispatch.robot_id].remove(dispatch.task_id)

    def requeue(self, book, task_id, robot_id):
        book.queues.setdefault(robot_id, []).insert(0, task_id)

    def has_pending(self, book):
        return any(book.queues.values())
