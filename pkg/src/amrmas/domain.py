"""Core vocabulary: cells, tasks, products, robots and the scenario aggregate.

All types here are immutable once a scenario is loaded. Cells use screen
coordinates: ``x`` grows east, ``y`` grows south (row 0 is the north edge).
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple

from .errors import NotFound

U64_MAX = 2**64 - 1


class Cell(NamedTuple):
    x: int
    y: int

    def to_json(self) -> list[int]:
        return [self.x, self.y]


def cell(value: Iterable[int]) -> Cell:
    x, y = value
    return Cell(int(x), int(y))


class TaskKind(enum.Enum):
    MATERIAL = "Material"
    TOOL = "Tool"
    FINISHED_PRODUCT = "FinishedProduct"


class Phase(enum.Enum):
    SETUP = "Setup"
    CLEANUP = "Cleanup"
    BOTH = "Both"


@dataclass(frozen=True)
class TaskSpec:
    """One courier run: travel to ``pickup``, handle, travel to ``dropoff``, handle."""

    id: str
    kind: TaskKind
    pickup: Cell
    dropoff: Cell
    handling_ticks: int = 2


@dataclass(frozen=True)
class Product:
    name: str
    setup: tuple[str, ...] = ()
    cleanup: tuple[str, ...] = ()


@dataclass(frozen=True)
class RobotProfile:
    id: str
    capabilities: frozenset[TaskKind]
    home: Cell
    speed: int = 1
    available: bool = True


@dataclass(frozen=True)
class ObstacleScript:
    """A human operator walking a cyclic patrol route.

    Consecutive waypoints need not be adjacent; the world expands each hop
    into a shortest path. ``dwell_ticks`` is spent standing on every waypoint.
    """

    id: str
    waypoints: tuple[Cell, ...]
    dwell_ticks: int = 0


@dataclass(frozen=True)
class Scenario:
    grid_width: int
    grid_height: int
    robots: tuple[RobotProfile, ...]
    tasks: dict[str, TaskSpec]
    products: tuple[Product, ...]
    walls: frozenset[Cell] = frozenset()
    obstacles: tuple[ObstacleScript, ...] = ()
    identity_timeout_ticks: int = 5
    obstacle_wait_ticks: int = 3
    replan_limit: int = 2
    seed: int = 0

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c.x < self.grid_width and 0 <= c.y < self.grid_height

    def robot(self, robot_id: str) -> RobotProfile:
        for r in self.robots:
            if r.id == robot_id:
                return r
        raise NotFound("robot", robot_id)

    def product(self, name: str) -> Product:
        for p in self.products:
            if p.name == name:
                return p
        raise NotFound("product", name)

    def task_list(self) -> list[TaskSpec]:
        """Every product's setup then cleanup tasks, products in declared order."""
        out: list[TaskSpec] = []
        for p in self.products:
            out.extend(expand_product(self, p.name, Phase.BOTH))
        return out

    # -- JSON mapping -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid_width": self.grid_width,
            "grid_height": self.grid_height,
            "walls": sorted(c.to_json() for c in self.walls),
            "robots": [
                {
                    "id": r.id,
                    "capabilities": sorted(k.value for k in r.capabilities),
                    "speed": r.speed,
                    "home": r.home.to_json(),
                    "available": r.available,
                }
                for r in self.robots
            ],
            "tasks": {
                tid: {
                    "kind": t.kind.value,
                    "pickup": t.pickup.to_json(),
                    "dropoff": t.dropoff.to_json(),
                    "handling_ticks": t.handling_ticks,
                }
                for tid, t in self.tasks.items()
            },
            "products": [
                {"name": p.name, "setup": list(p.setup), "cleanup": list(p.cleanup)}
                for p in self.products
            ],
            "obstacles": [
                {
                    "id": o.id,
                    "waypoints": [w.to_json() for w in o.waypoints],
                    "dwell_ticks": o.dwell_ticks,
                }
                for o in self.obstacles
            ],
            "identity_timeout_ticks": self.identity_timeout_ticks,
            "obstacle_wait_ticks": self.obstacle_wait_ticks,
            "replan_limit": self.replan_limit,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Scenario":
        """Build a Scenario from its JSON mapping.

        Raises KeyError/TypeError/ValueError on structurally bad input; semantic
        problems are left for :func:`validate_scenario`.
        """
        tasks = {}
        for tid, t in doc.get("tasks", {}).items():
            tasks[tid] = TaskSpec(
                id=t.get("id", tid),
                kind=TaskKind(t["kind"]),
                pickup=cell(t["pickup"]),
                dropoff=cell(t["dropoff"]),
                handling_ticks=int(t.get("handling_ticks", 2)),
            )
        return cls(
            grid_width=int(doc["grid_width"]),
            grid_height=int(doc["grid_height"]),
            walls=frozenset(cell(w) for w in doc.get("walls", [])),
            robots=tuple(
                RobotProfile(
                    id=r["id"],
                    capabilities=frozenset(TaskKind(k) for k in r["capabilities"]),
                    speed=int(r.get("speed", 1)),
                    home=cell(r["home"]),
                    available=bool(r.get("available", True)),
                )
                for r in doc.get("robots", [])
            ),
            tasks=tasks,
            products=tuple(
                Product(
                    name=p["name"],
                    setup=tuple(p.get("setup", [])),
                    cleanup=tuple(p.get("cleanup", [])),
                )
                for p in doc.get("products", [])
            ),
            obstacles=tuple(
                ObstacleScript(
                    id=o["id"],
                    waypoints=tuple(cell(w) for w in o["waypoints"]),
                    dwell_ticks=int(o.get("dwell_ticks", 0)),
                )
                for o in doc.get("obstacles", [])
            ),
            identity_timeout_ticks=int(doc.get("identity_timeout_ticks", 5)),
            obstacle_wait_ticks=int(doc.get("obstacle_wait_ticks", 3)),
            replan_limit=int(doc.get("replan_limit", 2)),
            seed=int(doc.get("seed", 0)),
        )


@dataclass(order=True)
class _Violation:
    entity: str
    field: str
    message: str = field(compare=False)


def validate_scenario(s: Scenario) -> list[str]:
    """Return every invariant violation in ``s``; an empty list means valid.

    Ordering is deterministic: by entity id, then field name.
    """
    found: list[_Violation] = []

    def bad(entity: str, fld: str, message: str) -> None:
        found.append(_Violation(entity, fld, message))

    def placeable(c: Cell) -> str | None:
        if not s.in_bounds(c):
            return "outside the grid"
        if c in s.walls:
            return "on a wall"
        return None

    for name in ("grid_width", "grid_height", "identity_timeout_ticks",
                 "obstacle_wait_ticks", "replan_limit"):
        if getattr(s, name) < 1:
            bad("scenario", name, f"{name}: must be >= 1")
    if not 0 <= s.seed <= U64_MAX:
        bad("scenario", "seed", "seed: must be an unsigned 64-bit integer")
    for w in sorted(s.walls):
        if not s.in_bounds(w):
            bad("walls", str(tuple(w)), f"walls: {tuple(w)} outside the grid")

    if not s.robots:
        bad("robots", "", "robots: must be non-empty")
    for rid, n in sorted(Counter(r.id for r in s.robots).items()):
        if n > 1:
            bad("robots", rid, f"robots: duplicate id {rid}")
    for r in s.robots:
        ent = f"robot {r.id}"
        if not r.capabilities:
            bad(ent, "capabilities", f"{ent}: capabilities must be non-empty")
        if r.speed < 1:
            bad(ent, "speed", f"{ent}: speed must be >= 1")
        if (why := placeable(r.home)) is not None:
            bad(ent, "home", f"{ent}: home {why}")

    for key, t in s.tasks.items():
        ent = f"task {key}"
        if t.id != key:
            bad(ent, "id", f"{ent}: table key does not match id {t.id!r}")
        if t.pickup == t.dropoff:
            bad(ent, "dropoff", f"{ent}: pickup equals dropoff")
        if t.handling_ticks < 0:
            bad(ent, "handling_ticks", f"{ent}: handling_ticks must be >= 0")
        for fld in ("dropoff", "pickup"):
            if (why := placeable(getattr(t, fld))) is not None:
                bad(ent, fld, f"{ent}: {fld} {why}")

    for pname, n in sorted(Counter(p.name for p in s.products).items()):
        if n > 1:
            bad("products", pname, f"products: duplicate name {pname}")
    refs: Counter[str] = Counter()
    for p in s.products:
        ent = f"product {p.name}"
        for fld in ("cleanup", "setup"):
            for tid in getattr(p, fld):
                if tid not in s.tasks:
                    bad(ent, fld, f"{ent}: {fld} references unknown task {tid}")
        for tid in sorted(set(p.setup) & set(p.cleanup)):
            bad(ent, "setup", f"{ent}: task {tid} in both setup and cleanup")
        refs.update(p.setup)
        refs.update(p.cleanup)
    for tid, n in sorted(refs.items()):
        if n > 1:
            bad(f"task {tid}", "products", f"task {tid}: referenced {n} times by products")

    for oid, n in sorted(Counter(o.id for o in s.obstacles).items()):
        if n > 1:
            bad("obstacles", oid, f"obstacles: duplicate id {oid}")
    for o in s.obstacles:
        ent = f"obstacle {o.id}"
        if not o.waypoints:
            bad(ent, "waypoints", f"{ent}: needs at least one waypoint")
        for w in o.waypoints:
            if (why := placeable(w)) is not None:
                bad(ent, "waypoints", f"{ent}: waypoint {tuple(w)} {why}")
        if o.dwell_ticks < 0:
            bad(ent, "dwell_ticks", f"{ent}: dwell_ticks must be >= 0")

    # Entities may not share a cell at tick 0.
    starts: dict[Cell, list[str]] = {}
    for r in s.robots:
        starts.setdefault(r.home, []).append(f"robot {r.id}")
    for o in s.obstacles:
        if o.waypoints:
            starts.setdefault(o.waypoints[0], []).append(f"obstacle {o.id}")
    for c, who in sorted(starts.items()):
        if len(who) > 1:
            bad("start", str(tuple(c)), f"start: {', '.join(who)} share cell {tuple(c)}")

    return [v.message for v in sorted(found)]


def expand_product(s: Scenario, product_name: str, phase: Phase | str) -> list[TaskSpec]:
    phase = Phase(phase)
    p = s.product(product_name)
    ids: tuple[str, ...]
    if phase is Phase.SETUP:
        ids = p.setup
    elif phase is Phase.CLEANUP:
        ids = p.cleanup
    else:
        ids = p.setup + p.cleanup
    return [s.tasks[i] for i in ids]
