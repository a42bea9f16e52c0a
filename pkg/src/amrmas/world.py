"""Grid world: static map, A* navigation, scripted operators, sensing and motion.

The floor is a 4-connected grid. Each tick, operators (obstacles) move first
and never yield; robot move requests are then resolved one robot at a time in
id order, so robots carry the whole burden of avoiding collisions.
"""

from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .domain import Cell, ObstacleScript, Scenario
from .errors import IllegalMove, UnknownAgent, Unreachable

DEFAULT_LOOKAHEAD = 2

# North, East, South, West; y grows southward.
NEIGHBOR_OFFSETS = ((0, -1), (1, 0), (0, 1), (-1, 0))


@dataclass(frozen=True)
class WorldStatics:
    width: int
    height: int
    walls: frozenset[Cell] = frozenset()

    @classmethod
    def from_scenario(cls, s: Scenario) -> "WorldStatics":
        return cls(s.grid_width, s.grid_height, frozenset(s.walls))

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.width and 0 <= c[1] < self.height

    def passable(self, c: Cell) -> bool:
        return self.in_bounds(c) and c not in self.walls

    def neighbors(self, c: Cell) -> Iterable[Cell]:
        for dx, dy in NEIGHBOR_OFFSETS:
            n = Cell(c[0] + dx, c[1] + dy)
            if self.passable(n):
                yield n


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def shortest_path(
    statics: WorldStatics,
    start: Cell,
    goal: Cell,
    blocked: frozenset[Cell] | set[Cell] = frozenset(),
) -> list[Cell]:
    """A* from ``start`` to ``goal``; returns the cells after start, goal included.

    ``blocked`` cells are treated as extra walls (used when replanning around
    a sensed obstacle). Raises Unreachable naming the goal when no path exists.
    """
    start, goal = Cell(*start), Cell(*goal)
    if start == goal:
        return []
    if not statics.passable(goal) or goal in blocked:
        raise Unreachable(goal)

    seq = 0
    frontier: list[tuple[int, int, Cell]] = [(manhattan(start, goal), seq, start)]
    g_cost = {start: 0}
    came_from: dict[Cell, Cell] = {}
    closed: set[Cell] = set()
    while frontier:
        _, _, cur = heapq.heappop(frontier)
        if cur == goal:
            path = []
            while cur != start:
                path.append(cur)
                cur = came_from[cur]
            path.reverse()
            return path
        if cur in closed:
            continue
        closed.add(cur)
        g_next = g_cost[cur] + 1
        for n in statics.neighbors(cur):
            if n in blocked or n in closed:
                continue
            if g_next < g_cost.get(n, 1 << 62):
                g_cost[n] = g_next
                came_from[n] = cur
                seq += 1
                heapq.heappush(frontier, (g_next + manhattan(n, goal), seq, n))
    raise Unreachable(goal)


def distances_from(statics: WorldStatics, source: Cell) -> dict[Cell, int]:
    """Breadth-first step counts from ``source`` to every reachable cell."""
    source = Cell(*source)
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for c in frontier:
            for n in statics.neighbors(c):
                if n not in dist:
                    dist[n] = dist[c] + 1
                    nxt.append(n)
        frontier = nxt
    return dist


@dataclass(frozen=True)
class LaserReading:
    blocked: bool = False
    blocking_cell: Cell | None = None


class MoveResult(enum.Enum):
    MOVED = "Moved"
    HELD = "Held"


@dataclass
class _Patrol:
    script: ObstacleScript
    route: list[Cell]
    waypoint_at: list[bool]
    index: int = 0
    dwell_left: int = 0

    @classmethod
    def build(cls, statics: WorldStatics, script: ObstacleScript) -> "_Patrol":
        wps = [Cell(*w) for w in script.waypoints]
        route, marks = [wps[0]], [True]
        if len(wps) > 1:
            for a, b in zip(wps, wps[1:] + wps[:1]):
                hop = shortest_path(statics, a, b)
                route.extend(hop)
                marks.extend([False] * len(hop))
                if hop:
                    marks[-1] = True
            # The last hop lands back on waypoint 0, which is already route[0].
            if len(route) > 1 and route[-1] == route[0]:
                route.pop()
                marks.pop()
        return cls(script, route, marks, 0, script.dwell_ticks)


@dataclass
class WorldState:
    statics: WorldStatics
    robot_poses: dict[str, Cell]
    obstacle_poses: dict[str, Cell] = field(default_factory=dict)
    tick: int = 0
    rng: random.Random = field(default_factory=random.Random)
    _patrols: dict[str, _Patrol] = field(default_factory=dict, repr=False)

    @classmethod
    def from_scenario(cls, s: Scenario) -> "WorldState":
        statics = WorldStatics.from_scenario(s)
        patrols = {o.id: _Patrol.build(statics, o) for o in s.obstacles}
        return cls(
            statics=statics,
            robot_poses={r.id: Cell(*r.home) for r in s.robots},
            obstacle_poses={oid: p.route[0] for oid, p in patrols.items()},
            rng=random.Random(s.seed),
            _patrols=patrols,
        )

    def occupant(self, c: Cell, ignore: str | None = None) -> str | None:
        for rid, pos in self.robot_poses.items():
            if pos == c and rid != ignore:
                return rid
        for oid, pos in self.obstacle_poses.items():
            if pos == c:
                return oid
        return None

    def occupied_cells(self) -> set[Cell]:
        return set(self.robot_poses.values()) | set(self.obstacle_poses.values())

    def snapshot(self) -> dict:
        return {
            "tick": self.tick,
            "robots": {rid: list(p) for rid, p in sorted(self.robot_poses.items())},
            "obstacles": {oid: list(p) for oid, p in sorted(self.obstacle_poses.items())},
        }


def sense(
    world: WorldState,
    robot_id: str,
    planned_path: Sequence[Cell],
    lookahead: int = DEFAULT_LOOKAHEAD,
) -> LaserReading:
    """Scan the next ``lookahead`` cells of ``planned_path`` for walls or entities."""
    if robot_id not in world.robot_poses:
        raise UnknownAgent(robot_id)
    for c in planned_path[:lookahead]:
        c = Cell(*c)
        if not world.statics.passable(c) or world.occupant(c, ignore=robot_id) is not None:
            return LaserReading(True, c)
    return LaserReading()


def _advance_obstacles(world: WorldState) -> None:
    for oid in sorted(world._patrols):
        patrol = world._patrols[oid]
        if patrol.dwell_left > 0:
            patrol.dwell_left -= 1
            continue
        if len(patrol.route) == 1:
            continue
        nxt = (patrol.index + 1) % len(patrol.route)
        target = patrol.route[nxt]
        if world.occupant(target) is not None:
            continue
        world.obstacle_poses[oid] = target
        patrol.index = nxt
        if patrol.waypoint_at[nxt]:
            patrol.dwell_left = patrol.script.dwell_ticks


def step_world(
    world: WorldState,
    move_requests: Mapping[str, Cell | Sequence[Cell]],
) -> dict[str, MoveResult]:
    """Advance the world one tick.

    A request is either one desired cell or a sequence of one-cell sub-steps
    (robots with speed > 1). A sub-step into a wall or an occupied cell holds
    the robot and cancels its remaining sub-steps for the tick.
    """
    for rid in move_requests:
        if rid not in world.robot_poses:
            raise UnknownAgent(rid)
    _advance_obstacles(world)

    results: dict[str, MoveResult] = {}
    for rid in sorted(move_requests):
        req = move_requests[rid]
        steps = [Cell(*req)] if _is_cell(req) else [Cell(*c) for c in req]
        result = MoveResult.MOVED
        for target in steps:
            pos = world.robot_poses[rid]
            if target == pos:
                continue
            if manhattan(pos, target) != 1:
                raise IllegalMove(f"{rid}: {tuple(pos)} -> {tuple(target)} is not a 4-neighbour step")
            if not world.statics.passable(target) or world.occupant(target) is not None:
                result = MoveResult.HELD
                break
            world.robot_poses[rid] = target
        results[rid] = result
    world.tick += 1
    return results


def _is_cell(v) -> bool:
    return len(v) == 2 and all(isinstance(i, int) for i in v)
