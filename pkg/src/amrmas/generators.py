"""Scenario builders: seeded random fleets and small corridor set-ups."""

from __future__ import annotations

import random

from .domain import (
    Cell,
    ObstacleScript,
    Product,
    RobotProfile,
    Scenario,
    TaskKind,
    TaskSpec,
)
from .world import WorldStatics, distances_from

KINDS = (TaskKind.MATERIAL, TaskKind.TOOL, TaskKind.FINISHED_PRODUCT)


def _connected_walls(rng: random.Random, width: int, height: int, density: float) -> frozenset[Cell]:
    cells = [Cell(x, y) for x in range(width) for y in range(height)]
    for _ in range(100):
        walls = frozenset(c for c in cells if rng.random() < density)
        free = [c for c in cells if c not in walls]
        reach = distances_from(WorldStatics(width, height, walls), free[0])
        if len(reach) == len(free):
            return walls
    return frozenset()


def random_scenario(
    seed: int,
    *,
    n_robots: int | None = None,
    n_tasks: int | None = None,
    n_obstacles: int = 0,
    width: int | None = None,
    height: int | None = None,
    wall_density: float = 0.08,
) -> Scenario:
    """A valid random scenario whose fleet covers every task kind.

    Every free cell is reachable from every other, so estimates never fail.
    """
    rng = random.Random(seed)
    n_robots = n_robots if n_robots is not None else rng.randint(2, 6)
    n_tasks = n_tasks if n_tasks is not None else rng.randint(5, 40)
    width = width or rng.randint(12, 20)
    height = height or rng.randint(10, 16)
    walls = _connected_walls(rng, width, height, wall_density)
    free = [Cell(x, y) for y in range(height) for x in range(width) if Cell(x, y) not in walls]
    rng.shuffle(free)

    homes = free[:n_robots]
    starts = free[n_robots:n_robots + n_obstacles]
    spots = free[n_robots + n_obstacles:]

    caps = [frozenset(k for k in KINDS if rng.random() < 0.5) for _ in range(n_robots)]
    caps = [c or frozenset([rng.choice(KINDS)]) for c in caps]
    for k in KINDS:
        if not any(k in c for c in caps):
            i = rng.randrange(n_robots)
            caps[i] = caps[i] | {k}
    robots = tuple(
        RobotProfile(f"R{i}", caps[i], homes[i], speed=rng.choice((1, 1, 1, 2)))
        for i in range(n_robots)
    )

    tasks = {}
    for i in range(n_tasks):
        pickup, dropoff = rng.sample(spots, 2)
        tid = f"T{i:02d}"
        tasks[tid] = TaskSpec(tid, rng.choice(KINDS), pickup, dropoff, rng.randint(0, 3))

    ids = list(tasks)
    products = []
    n_products = rng.randint(1, 3)
    for p in range(n_products):
        chunk = ids[p::n_products]
        cut = rng.randint(0, len(chunk))
        products.append(Product(f"P{p}", tuple(chunk[:cut]), tuple(chunk[cut:])))

    obstacles = tuple(
        ObstacleScript(
            f"O{i}",
            (starts[i],) + tuple(rng.sample(spots, rng.randint(1, 3))),
            dwell_ticks=rng.randint(0, 3),
        )
        for i in range(n_obstacles)
    )
    return Scenario(
        grid_width=width,
        grid_height=height,
        walls=walls,
        robots=robots,
        tasks=tasks,
        products=tuple(products),
        obstacles=obstacles,
        identity_timeout_ticks=rng.randint(1, 5),
        obstacle_wait_ticks=rng.randint(1, 4),
        replan_limit=rng.randint(1, 3),
        seed=seed,
    )


def corridor_scenario(*, parked: bool, replan_limit: int = 2) -> Scenario:
    """One robot, one task down a walled corridor with an operator in the way.

    Layout (10 x 5)::

        y=0..2  side room
        y=3     wall row with a door at x=3
        y=4     corridor; robot home at x=0, pickup x=8, dropoff x=9

    With ``parked=False`` the operator stands in the corridor below the door
    for 8 ticks, then walks into the side room. With ``parked=True`` it never
    moves and the corridor is cut.
    """
    walls = frozenset(Cell(x, 3) for x in range(10) if x != 3)
    start = Cell(3, 4)
    waypoints = (start,) if parked else (start, Cell(3, 0))
    return Scenario(
        grid_width=10,
        grid_height=5,
        walls=walls,
        robots=(RobotProfile("R1", frozenset(KINDS), Cell(0, 4)),),
        tasks={"T1": TaskSpec("T1", TaskKind.MATERIAL, Cell(8, 4), Cell(9, 4), 1)},
        products=(Product("P", ("T1",), ()),),
        obstacles=(ObstacleScript("op", waypoints, dwell_ticks=8),),
        identity_timeout_ticks=1,
        obstacle_wait_ticks=10,
        replan_limit=replan_limit,
    )
