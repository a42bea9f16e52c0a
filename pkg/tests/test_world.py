import random

import pytest
from hypothesis import given, settings, strategies as st

from amrmas.domain import Cell, ObstacleScript, Product, RobotProfile, Scenario, TaskKind, TaskSpec
from amrmas.errors import IllegalMove, UnknownAgent, Unreachable
from amrmas.world import (
    LaserReading,
    MoveResult,
    WorldState,
    WorldStatics,
    distances_from,
    sense,
    shortest_path,
    step_world,
)
from oracles import bfs_distance


def test_path_to_self():
    assert shortest_path(WorldStatics(3, 3), Cell(1, 1), Cell(1, 1)) == []


def test_straight_line():
    assert shortest_path(WorldStatics(5, 5), Cell(0, 0), Cell(2, 0)) == [(1, 0), (2, 0)]


def test_path_avoids_walls_and_is_contiguous():
    walls = frozenset(Cell(2, y) for y in range(4))
    path = shortest_path(WorldStatics(5, 5, walls), Cell(0, 0), Cell(4, 0))
    assert len(path) == 4 + 4 + 4
    prev = Cell(0, 0)
    for c in path:
        assert abs(c.x - prev.x) + abs(c.y - prev.y) == 1 and c not in walls
        prev = c


def test_unreachable():
    walls = frozenset({Cell(1, 0), Cell(1, 1), Cell(1, 2)})
    with pytest.raises(Unreachable):
        shortest_path(WorldStatics(3, 3, walls), Cell(0, 0), Cell(2, 2))


def test_blocked_cells_act_as_walls():
    with pytest.raises(Unreachable):
        shortest_path(WorldStatics(5, 1), Cell(0, 0), Cell(4, 0), blocked={Cell(2, 0)})


def test_tie_break_prefers_north_then_east():
    # (0,2) -> (1,1): north-first gives (0,1) before (1,2)
    assert shortest_path(WorldStatics(3, 3), Cell(0, 2), Cell(1, 1)) == [(0, 1), (1, 1)]


def test_twenty_random_maps_match_bfs():
    rng = random.Random(20)
    for _ in range(20):
        w, h = rng.randint(3, 12), rng.randint(3, 12)
        walls = frozenset(Cell(x, y) for x in range(w) for y in range(h) if rng.random() < 0.25)
        free = [Cell(x, y) for x in range(w) for y in range(h) if Cell(x, y) not in walls]
        if len(free) < 2:
            continue
        for _ in range(10):
            a, b = rng.choice(free), rng.choice(free)
            want = bfs_distance(w, h, walls, a, b)
            if want is None:
                with pytest.raises(Unreachable):
                    shortest_path(WorldStatics(w, h, walls), a, b)
            else:
                assert len(shortest_path(WorldStatics(w, h, walls), a, b)) == want


def test_distances_from_matches_bfs():
    walls = frozenset({Cell(1, 1), Cell(2, 1), Cell(3, 1)})
    field = distances_from(WorldStatics(5, 4, walls), Cell(2, 0))
    for c, d in field.items():
        assert d == bfs_distance(5, 4, walls, (2, 0), c)


def _world(robots, obstacles=(), walls=frozenset(), w=8, h=8):
    s = Scenario(
        grid_width=w, grid_height=h, walls=walls,
        robots=tuple(RobotProfile(rid, frozenset({TaskKind.TOOL}), Cell(*pos)) for rid, pos in robots.items()),
        tasks={"T": TaskSpec("T", TaskKind.TOOL, Cell(0, h - 1), Cell(w - 1, h - 1))},
        products=(Product("P", ("T",)),),
        obstacles=tuple(obstacles),
    )
    return WorldState.from_scenario(s)


def test_sense_clear():
    world = _world({"R": (0, 0)})
    assert sense(world, "R", [Cell(1, 0), Cell(2, 0)]) == LaserReading(False, None)


def test_sense_immediate_obstacle():
    world = _world({"R": (0, 0)}, [ObstacleScript("o", (Cell(1, 0),))])
    assert sense(world, "R", [Cell(1, 0), Cell(2, 0)]) == LaserReading(True, Cell(1, 0))


def test_sense_outside_window():
    world = _world({"R": (0, 0)}, [ObstacleScript("o", (Cell(3, 0),))])
    path = [Cell(1, 0), Cell(2, 0), Cell(3, 0)]
    assert not sense(world, "R", path, lookahead=2).blocked
    assert sense(world, "R", path, lookahead=3).blocked


def test_sense_sees_other_robots():
    world = _world({"A": (0, 0), "B": (2, 0)})
    assert sense(world, "A", [Cell(1, 0), Cell(2, 0)]).blocking_cell == (2, 0)


def test_sense_unknown_robot():
    with pytest.raises(UnknownAgent):
        sense(_world({"R": (0, 0)}), "X", [])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.lists(st.integers(0, 7), min_size=0, max_size=8), st.integers(0, 7))
def test_sense_window_property(lookahead, xs, obstacle_x):
    world = _world({"R": (0, 7)}, [ObstacleScript("o", (Cell(obstacle_x, 3),))])
    path = [Cell(x, 3) for x in xs]
    reading = sense(world, "R", path, lookahead)
    assert reading.blocked == (reading.blocking_cell is not None)
    if reading.blocked:
        assert reading.blocking_cell in path[:lookahead]
    assert reading.blocked == (Cell(obstacle_x, 3) in path[:lookahead])


def test_same_cell_contest():
    world = _world({"A": (0, 0), "B": (2, 0)})
    res = step_world(world, {"B": Cell(1, 0), "A": Cell(1, 0)})
    assert res == {"A": MoveResult.MOVED, "B": MoveResult.HELD}
    assert world.robot_poses == {"A": (1, 0), "B": (2, 0)}
    assert world.tick == 1


def test_stay_is_moved():
    world = _world({"A": (3, 3)})
    assert step_world(world, {"A": Cell(3, 3)}) == {"A": MoveResult.MOVED}


def test_illegal_move():
    with pytest.raises(IllegalMove):
        step_world(_world({"A": (0, 0)}), {"A": Cell(2, 0)})


def test_move_into_wall_is_held():
    world = _world({"A": (0, 0)}, walls=frozenset({Cell(1, 0)}))
    assert step_world(world, {"A": Cell(1, 0)}) == {"A": MoveResult.HELD}


def test_swap_is_refused():
    world = _world({"A": (0, 0), "B": (1, 0)})
    assert step_world(world, {"A": Cell(1, 0), "B": Cell(0, 0)}) == {
        "A": MoveResult.HELD, "B": MoveResult.HELD,
    }


def test_follow_the_leader_depends_on_id_order():
    # A resolves first, so it cannot enter B's cell even though B vacates it.
    world = _world({"A": (0, 0), "B": (1, 0)})
    assert step_world(world, {"A": Cell(1, 0), "B": Cell(2, 0)})["A"] is MoveResult.HELD
    world = _world({"B": (0, 0), "A": (1, 0)})
    assert step_world(world, {"A": Cell(2, 0), "B": Cell(1, 0)}) == {
        "A": MoveResult.MOVED, "B": MoveResult.MOVED,
    }


def test_substeps_stop_at_first_block():
    world = _world({"A": (0, 0)}, [ObstacleScript("o", (Cell(2, 0),))])
    assert step_world(world, {"A": [Cell(1, 0), Cell(2, 0)]}) == {"A": MoveResult.HELD}
    assert world.robot_poses["A"] == (1, 0)


def test_obstacle_moves_before_robots():
    world = _world({"A": (0, 1)}, [ObstacleScript("o", (Cell(0, 0), Cell(1, 1)))])
    # obstacle route (0,0)->(1,0)->(1,1)->(0,1 blocked)... first hop lands on (1,0)
    assert step_world(world, {"A": Cell(1, 1)}) == {"A": MoveResult.MOVED}
    assert world.obstacle_poses["o"] == (1, 0)
    # next tick the obstacle wants (1,1) where A now stands: it dwells
    step_world(world, {"A": Cell(1, 1)})
    assert world.obstacle_poses["o"] == (1, 0)


def test_obstacle_dwell_and_cycle():
    world = _world({"A": (7, 7)}, [ObstacleScript("o", (Cell(0, 0), Cell(2, 0)), dwell_ticks=1)])
    seen = []
    for _ in range(8):
        step_world(world, {})
        seen.append(tuple(world.obstacle_poses["o"]))
    assert seen == [(0, 0), (1, 0), (2, 0), (2, 0), (1, 0), (0, 0), (0, 0), (1, 0)]


def test_no_co_occupancy_random_walks():
    rng = random.Random(3)
    world = _world({f"R{i}": (i, 0) for i in range(5)},
                   [ObstacleScript("o1", (Cell(0, 4), Cell(7, 4))),
                    ObstacleScript("o2", (Cell(3, 7), Cell(3, 1)), dwell_ticks=2)])
    for _ in range(300):
        reqs = {}
        for rid, pos in world.robot_poses.items():
            dx, dy = rng.choice([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])
            reqs[rid] = Cell(pos.x + dx, pos.y + dy)
        step_world(world, reqs)
        cells = list(world.robot_poses.values()) + list(world.obstacle_poses.values())
        assert len(cells) == len(set(cells))
        assert all(world.statics.passable(c) for c in cells)
