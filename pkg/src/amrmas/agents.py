"""Master and Robot agents plus the tick scheduler that drives them.

Per tick the scheduler runs the Master, then every Robot in id order, then
advances the world. All agent-to-agent effects go through the message bus;
robots observe the world only through :func:`~amrmas.world.sense` and their
own pose.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .dispatch import (
    DispatchBook,
    DispatchStrategy,
    QueuePlan,
    RosterEntry,
    create_strategy,
    estimate_table,
)
from .domain import Cell, RobotProfile, Scenario, TaskSpec, validate_scenario
from .errors import TimedOut, Unreachable, ValidationFailed
from .messaging import (
    Identity,
    IdentityCheck,
    MessageBus,
    Order,
    OrderNotice,
    Outcome,
)
from .trace import Trace
from .world import (
    DEFAULT_LOOKAHEAD,
    WorldState,
    WorldStatics,
    sense,
    shortest_path,
    step_world,
)

if TYPE_CHECKING:
    from .report import RunReport

MASTER_ID = "master"
DEFAULT_TICK_LIMIT = 100_000


class MasterPhase(enum.Enum):
    NOT_STARTED = "NotStarted"
    IDENTITY_POLLING = "IdentityPolling"
    DISPATCHING = "Dispatching"
    FINISHED = "Finished"


@dataclass
class OrderRecord:
    task_id: str
    robot_id: str
    order_msg_id: int
    sent_tick: int
    noticed_tick: int | None = None
    elapsed_ticks: int | None = None
    outcome: Outcome | None = None


class MasterAgent:
    """Static coordinator: discovers the fleet, then dispatches every task."""

    def __init__(self, scenario: Scenario, strategy: DispatchStrategy, trace: Trace,
                 agent_id: str = MASTER_ID):
        self.id = agent_id
        self.scenario = scenario
        self.strategy = strategy
        self.trace = trace
        self.tasks: dict[str, TaskSpec] = {t.id: t for t in scenario.task_list()}
        self.phase = MasterPhase.NOT_STARTED
        self.deadline: int | None = None
        self.roster: list[RosterEntry] = []
        self.plan: QueuePlan | None = None
        self.book = DispatchBook(order=list(self.tasks))
        self.order_log: list[OrderRecord] = []
        self._outstanding: dict[int, OrderRecord] = {}
        self._retried: set[str] = set()

    @property
    def finished(self) -> bool:
        return self.phase is MasterPhase.FINISHED

    def roster_entry(self, robot_id: str) -> RosterEntry | None:
        for r in self.roster:
            if r.robot_id == robot_id:
                return r
        return None

    # -- lifecycle ----------------------------------------------------------

    def startup(self, bus: MessageBus, known_robot_ids: list[str]) -> None:
        assert self.phase is MasterPhase.NOT_STARTED, "master already started"
        for rid in known_robot_ids:
            bus.send(self.id, rid, IdentityCheck())
        if not known_robot_ids:
            self._begin_dispatch(bus.now)
            return
        self.deadline = bus.now + self.scenario.identity_timeout_ticks
        self.phase = MasterPhase.IDENTITY_POLLING

    def tick(self, bus: MessageBus, now: int) -> None:
        if self.phase is MasterPhase.IDENTITY_POLLING:
            for env in bus.drain(self.id):
                if isinstance(env.payload, Identity) and self.roster_entry(env.sender) is None:
                    self.roster.append(RosterEntry(env.payload.robot_id, env.payload.capabilities))
                    self.trace.event(now, self.id, "identity_received", robot_id=env.sender)
            if now >= self.deadline:
                self._begin_dispatch(now)
        elif self.phase is MasterPhase.DISPATCHING:
            for env in bus.drain(self.id):
                if isinstance(env.payload, OrderNotice):
                    self._on_notice(env, now)
                else:
                    self.trace.event(now, self.id, "ignored_message", msg_id=env.msg_id)
        if self.phase is MasterPhase.DISPATCHING:
            self._dispatch(bus, now)

    # -- internals ----------------------------------------------------------

    def _begin_dispatch(self, now: int) -> None:
        self.roster.sort(key=lambda r: r.robot_id)
        self.phase = MasterPhase.DISPATCHING
        self.trace.event(
            now, self.id, "dispatch_started",
            strategy=self.strategy.designation,
            roster=[r.robot_id for r in self.roster],
        )
        tasks = list(self.tasks.values())
        estimates: dict[tuple[str, str], int] = {}
        if self.strategy.uses_estimates:
            # Capabilities come from the Identity replies, travel data from the profiles.
            profiles = [
                RobotProfile(r.robot_id, r.capabilities, self.scenario.robot(r.robot_id).home,
                             self.scenario.robot(r.robot_id).speed)
                for r in self.roster
            ]
            estimates = estimate_table(tasks, profiles, WorldStatics.from_scenario(self.scenario))
        self.plan = self.strategy.prepare(tasks, self.roster, estimates)
        if self.plan is not None:
            self.book.queues = {rid: list(q) for rid, q in self.plan.queues.items()}
            self.trace.event(now, self.id, "plan_built", plan=self.plan.to_dict())

    def _on_notice(self, env, now: int) -> None:
        notice: OrderNotice = env.payload
        rec = self._outstanding.pop(env.correlates, None)
        if rec is None or rec.task_id != notice.task_id or rec.robot_id != env.sender:
            self.trace.event(now, self.id, "unmatched_notice", msg_id=env.msg_id)
            return
        rec.noticed_tick = now
        rec.elapsed_ticks = notice.elapsed_ticks
        rec.outcome = notice.outcome
        self.roster_entry(env.sender).busy_with = None
        self.book.in_flight.discard(notice.task_id)
        if notice.outcome is Outcome.COMPLETED:
            self.book.completed.add(notice.task_id)
        elif notice.task_id not in self._retried:
            self._retried.add(notice.task_id)
            self.strategy.requeue(self.book, notice.task_id, env.sender)
            self.trace.event(now, self.id, "task_requeued", task_id=notice.task_id)
        else:
            self.book.failed.add(notice.task_id)
            self.trace.event(now, self.id, "task_abandoned", task_id=notice.task_id)

    def _dispatch(self, bus: MessageBus, now: int) -> None:
        for d in self.strategy.next_dispatches(self.tasks, self.book, self.roster):
            entry = self.roster_entry(d.robot_id)
            assert entry is not None and entry.idle, f"{d.robot_id} is not idle"
            msg_id = bus.send(self.id, d.robot_id, Order(d.task_id))
            entry.busy_with = d.task_id
            self.book.in_flight.add(d.task_id)
            self.strategy.claim(self.book, d)
            rec = OrderRecord(d.task_id, d.robot_id, msg_id, now)
            self.order_log.append(rec)
            self._outstanding[msg_id] = rec
        if not self.book.in_flight and not self.strategy.has_pending(self.book):
            self.phase = MasterPhase.FINISHED
            self.trace.event(now, self.id, "finished")


class RobotMode(enum.Enum):
    IDLE = "Idle"
    NAVIGATING = "Navigating"
    HANDLING = "Handling"
    WAITING = "WaitingForClearance"


@dataclass
class RobotAgent:
    """Courier robot: reacts to Orders, navigates on its own, stops for obstacles."""

    profile: RobotProfile
    scenario: Scenario
    trace: Trace
    lookahead: int = DEFAULT_LOOKAHEAD
    master_id: str = MASTER_ID

    mode: RobotMode = RobotMode.IDLE
    leg: str = ""  # "pickup" or "dropoff"
    path: list[Cell] = field(default_factory=list)
    path_index: int = 0
    handling_left: int = 0
    wait_left: int = 0
    replans_used: int = 0
    current_task: TaskSpec | None = None
    task_started_at: int | None = None
    order_msg_id: int | None = None
    _waited: int = 0

    @property
    def id(self) -> str:
        return self.profile.id

    @property
    def remaining_path(self) -> list[Cell]:
        return self.path[self.path_index:]

    def _leg_target(self) -> Cell:
        t = self.current_task
        return t.pickup if self.leg == "pickup" else t.dropoff

    def tick(self, bus: MessageBus, world: WorldState, now: int) -> list[Cell]:
        """Run one tick; returns the sub-step cells to request (empty = stay)."""
        for env in bus.drain(self.id):
            self._on_message(env, bus, world, now)
        if self.mode is RobotMode.IDLE:
            return []

        while True:
            if self.mode is RobotMode.NAVIGATING:
                if not self.remaining_path:
                    self.trace.event(now, self.id, "arrived", task_id=self.current_task.id, leg=self.leg)
                    self.mode = RobotMode.HANDLING
                    self.handling_left = self.current_task.handling_ticks
                    continue
                reading = sense(world, self.id, self.remaining_path, self.lookahead)
                if reading.blocked:
                    self.mode = RobotMode.WAITING
                    self.wait_left = self.scenario.obstacle_wait_ticks
                    self._waited += 1
                    self.trace.event(now, self.id, "wait_started", task_id=self.current_task.id,
                                     cell=list(reading.blocking_cell))
                    return []
                return self.remaining_path[: self.profile.speed]

            if self.mode is RobotMode.WAITING:
                reading = sense(world, self.id, self.remaining_path, self.lookahead)
                if not reading.blocked:
                    self.trace.event(now, self.id, "resumed", task_id=self.current_task.id,
                                     waited_ticks=self._flush_wait())
                    self.mode = RobotMode.NAVIGATING
                    continue
                self._waited += 1
                self.wait_left -= 1
                if self.wait_left > 0:
                    return []
                if self.replans_used >= self.scenario.replan_limit:
                    self.trace.event(now, self.id, "task_failed", task_id=self.current_task.id,
                                     waited_ticks=self._flush_wait())
                    self._finish(bus, now, Outcome.FAILED)
                    return []
                self._replan(world, now, reading.blocking_cell)
                return []

            if self.mode is RobotMode.HANDLING:
                if self.handling_left > 0:
                    self.handling_left -= 1
                    spent = True
                else:
                    spent = False
                if self.handling_left > 0:
                    return []
                if self.leg == "dropoff":
                    self.trace.event(now, self.id, "task_completed", task_id=self.current_task.id)
                    self._finish(bus, now, Outcome.COMPLETED)
                    return []
                self.leg = "dropoff"
                self._plan_leg(bus, world, now)
                if spent or self.mode is RobotMode.IDLE:
                    return []
                continue

            return []

    def observe(self, world: WorldState) -> None:
        """Sync path progress with the pose after the world stepped."""
        if self.mode is not RobotMode.NAVIGATING:
            return
        pose = world.robot_poses[self.id]
        window = self.path[self.path_index: self.path_index + self.profile.speed]
        if pose in window:
            self.path_index += window.index(pose) + 1

    # -- internals ----------------------------------------------------------

    def _on_message(self, env, bus: MessageBus, world: WorldState, now: int) -> None:
        p = env.payload
        if isinstance(p, IdentityCheck):
            if self.profile.available:
                bus.send(self.id, env.sender, Identity(self.id, self.profile.capabilities),
                         correlates=env.msg_id)
        elif isinstance(p, Order):
            if self.mode is not RobotMode.IDLE:
                self.trace.event(now, self.id, "protocol_violation", msg_id=env.msg_id,
                                 reason=f"Order for {p.task_id} while busy")
                return
            self.current_task = self.scenario.tasks[p.task_id]
            self.task_started_at = now
            self.order_msg_id = env.msg_id
            self.replans_used = 0
            self._waited = 0
            self.leg = "pickup"
            self.trace.event(now, self.id, "order_accepted", task_id=p.task_id, msg_id=env.msg_id)
            self._plan_leg(bus, world, now)

    def _plan_leg(self, bus: MessageBus, world: WorldState, now: int) -> None:
        try:
            self.path = shortest_path(world.statics, world.robot_poses[self.id], self._leg_target())
        except Unreachable:
            self.trace.event(now, self.id, "task_failed", task_id=self.current_task.id,
                             waited_ticks=self._flush_wait())
            self._finish(bus, now, Outcome.FAILED)
            return
        self.path_index = 0
        self.mode = RobotMode.NAVIGATING

    def _replan(self, world: WorldState, now: int, avoid: Cell) -> None:
        self.replans_used += 1
        pose = world.robot_poses[self.id]
        try:
            path = shortest_path(world.statics, pose, self._leg_target(), blocked={avoid})
        except Unreachable:
            self.trace.event(now, self.id, "replan", task_id=self.current_task.id, ok=False,
                             avoid=list(avoid), waited_ticks=self._flush_wait())
            self.wait_left = self.scenario.obstacle_wait_ticks
            return
        self.trace.event(now, self.id, "replan", task_id=self.current_task.id, ok=True,
                         avoid=list(avoid), waited_ticks=self._flush_wait())
        self.path = path
        self.path_index = 0
        self.mode = RobotMode.NAVIGATING

    def _flush_wait(self) -> int:
        waited, self._waited = self._waited, 0
        return waited

    def _finish(self, bus: MessageBus, now: int, outcome: Outcome) -> None:
        notice = OrderNotice(self.current_task.id, now - self.task_started_at + 1, outcome)
        bus.send(self.id, self.master_id, notice, correlates=self.order_msg_id)
        self.mode = RobotMode.IDLE
        self.current_task = None
        self.task_started_at = None
        self.order_msg_id = None
        self.path = []
        self.path_index = 0


def master_startup(master: MasterAgent, bus: MessageBus, known_robot_ids: list[str]) -> None:
    master.startup(bus, known_robot_ids)


def master_tick(master: MasterAgent, bus: MessageBus, now: int) -> None:
    master.tick(bus, now)


def robot_tick(robot: RobotAgent, bus: MessageBus, world: WorldState, now: int) -> list[Cell]:
    return robot.tick(bus, world, now)


class Simulation:
    """Bus, world and agents wired together; :meth:`step` runs one tick."""

    def __init__(self, scenario: Scenario, strategy_designation: str, *,
                 snapshots: bool = False, lookahead: int = DEFAULT_LOOKAHEAD):
        violations = validate_scenario(scenario)
        if violations:
            raise ValidationFailed(violations)
        strategy = create_strategy(strategy_designation)
        self.scenario = scenario
        self.snapshots = snapshots
        self.trace = Trace()
        self.bus = MessageBus(on_send=self.trace.message)
        self.world = WorldState.from_scenario(scenario)
        self.master = MasterAgent(scenario, strategy, self.trace)
        self.robots = [
            RobotAgent(p, scenario, self.trace, lookahead=lookahead)
            for p in sorted(scenario.robots, key=lambda p: p.id)
        ]
        self.bus.register(self.master.id)
        for r in self.robots:
            self.bus.register(r.id)
        self.tick = 0
        self.trace.event(
            0, "sim", "run_started",
            strategy=strategy.designation,
            seed=scenario.seed,
            grid=[scenario.grid_width, scenario.grid_height],
            walls=sorted([w.x, w.y] for w in scenario.walls),
            robots=[r.id for r in self.robots],
        )
        if snapshots:
            self.trace.snapshot(self.world.snapshot())
        master_startup(self.master, self.bus, [p.id for p in scenario.robots])

    def robot(self, robot_id: str) -> RobotAgent:
        return next(r for r in self.robots if r.id == robot_id)

    def step(self) -> bool:
        """Run one tick. Returns True once the Master has finished."""
        now = self.tick
        self.bus.now = now
        master_tick(self.master, self.bus, now)
        if self.master.finished:
            return True
        requests = {r.id: robot_tick(r, self.bus, self.world, now) for r in self.robots}
        step_world(self.world, requests)
        for r in self.robots:
            r.observe(self.world)
        if self.snapshots:
            self.trace.snapshot(self.world.snapshot())
        self.tick += 1
        return False

    def run(self, tick_limit: int = DEFAULT_TICK_LIMIT) -> None:
        while self.tick < tick_limit:
            if self.step():
                return
        raise TimedOut(tick_limit)


def run_simulation(
    scenario: Scenario,
    strategy_designation: str,
    *,
    tick_limit: int = DEFAULT_TICK_LIMIT,
    snapshots: bool = False,
    lookahead: int = DEFAULT_LOOKAHEAD,
) -> tuple[list[dict], "RunReport"]:
    """Simulate ``scenario`` to completion; returns the trace records and the report."""
    from .report import compute_report

    sim = Simulation(scenario, strategy_designation, snapshots=snapshots, lookahead=lookahead)
    sim.run(tick_limit)
    return sim.trace.records, compute_report(sim.trace.records)
