import math

import numpy as np
import pytest

from oracles import SQRT2, dijkstra_counts, path_move_counts
from poinav.errors import NoPathError, StartBlockedError
from poinav.navgrid import OccupancyGrid
from poinav.planner import goal_cells, plan_path
from poinav.scene import EntranceRegion


def raw_grid(cells):
    return OccupancyGrid(
        resolution=1.0,
        origin=(0.0, 0.0),
        cells=np.asarray(cells, dtype=np.uint8),
        inflation_radius=0.0,
    )


def region_at_cell(ix, iy):
    """Small goal rectangle centered on a cell center (unit-resolution grids)."""
    cx, cy = ix + 0.5, iy + 0.5
    return EntranceRegion(flush_a=(cx - 0.3, cy - 0.3), flush_b=(cx + 0.3, cy - 0.3), depth=0.6, elevation=0.0)


def test_adjacent_goal_two_waypoints():
    grid = raw_grid(np.zeros((3, 3)))
    path = plan_path(grid, (0.5, 0.5), region_at_cell(1, 0), epsilon=0.1)
    assert len(path.waypoints) == 2
    assert path.length_m == pytest.approx(1.0)


def test_wall_with_gap_matches_dijkstra():
    cells = np.zeros((5, 5), dtype=np.uint8)
    cells[:, 2] = 1
    cells[4, 2] = 0  # gap at the top
    grid = raw_grid(cells)
    region = region_at_cell(4, 0)
    path = plan_path(grid, (0.5, 0.5), region, epsilon=0.1)
    goals = goal_cells(grid, region, 0.1)
    counts = dijkstra_counts(cells, (0, 0), goals)
    a, d = path_move_counts(path.waypoints)
    assert (a, d) == counts
    assert path.length_m == pytest.approx((a + d * SQRT2) * 1.0)


def test_walled_off_goal_raises():
    cells = np.zeros((5, 5), dtype=np.uint8)
    cells[:, 2] = 1
    grid = raw_grid(cells)
    with pytest.raises(NoPathError):
        plan_path(grid, (0.5, 0.5), region_at_cell(4, 0), epsilon=0.1)


def test_blocked_start_raises():
    cells = np.zeros((3, 3), dtype=np.uint8)
    cells[0, 0] = 1
    with pytest.raises(StartBlockedError):
        plan_path(raw_grid(cells), (0.5, 0.5), region_at_cell(2, 2), epsilon=0.1)


def test_deterministic_waypoints():
    rng = np.random.default_rng(3)
    cells = (rng.random((20, 20)) < 0.3).astype(np.uint8)
    cells[0, 0] = 0
    cells[19, 19] = 0
    grid = raw_grid(cells)
    region = region_at_cell(19, 19)
    try:
        p1 = plan_path(grid, (0.5, 0.5), region, epsilon=0.1)
        p2 = plan_path(grid, (0.5, 0.5), region, epsilon=0.1)
        assert p1.waypoints == p2.waypoints
    except NoPathError:
        pytest.skip("seed produced a disconnected grid")


def _random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(8, 65))
    density = float(rng.uniform(0.15, 0.45))
    cells = (rng.random((n, n)) < density).astype(np.uint8)
    free = np.argwhere(cells == 0)
    if len(free) < 2:
        return None
    si = free[int(rng.integers(len(free)))]
    gi = free[int(rng.integers(len(free)))]
    cells[si[0], si[1]] = 0
    start = (float(si[1]) + 0.5, float(si[0]) + 0.5)
    region = region_at_cell(int(gi[1]), int(gi[0]))
    return cells, start, region, (int(si[1]), int(si[0]))


def test_astar_matches_dijkstra_on_200_random_grids():
    checked = 0
    seed = 0
    while checked < 200:
        case = _random_case(seed)
        seed += 1
        if case is None:
            continue
        cells, start, region, start_cell = case
        grid = raw_grid(cells)
        goals = goal_cells(grid, region, 0.1)
        oracle = dijkstra_counts(cells, start_cell, goals) if goals else None
        try:
            path = plan_path(grid, start, region, epsilon=0.1)
        except NoPathError:
            assert oracle is None
            checked += 1
            continue
        assert oracle is not None
        a, d = path_move_counts(path.waypoints)
        assert (a, d) == oracle, f"seed {seed - 1}"
        checked += 1
    assert checked == 200


def test_octile_heuristic_admissible_on_expansions():
    # h(n) must never exceed the true remaining cost; validate on a sample of
    # free cells against exact Dijkstra-to-goal costs.
    rng = np.random.default_rng(12)
    cells = (rng.random((30, 30)) < 0.25).astype(np.uint8)
    cells[0, 0] = 0
    cells[29, 29] = 0
    grid = raw_grid(cells)
    region = region_at_cell(29, 29)
    goals = goal_cells(grid, region, 0.1)
    if not goals or dijkstra_counts(cells, (0, 0), goals) is None:
        pytest.skip("disconnected sample")
    gx0 = min(g[0] for g in goals)
    gx1 = max(g[0] for g in goals)
    gy0 = min(g[1] for g in goals)
    gy1 = max(g[1] for g in goals)
    free = np.argwhere(cells == 0)
    for iy, ix in free[::7]:
        truth = dijkstra_counts(cells, (int(ix), int(iy)), goals)
        if truth is None:
            continue
        cx = min(max(int(ix), gx0), gx1)
        cy = min(max(int(iy), gy0), gy1)
        dx, dy = abs(int(ix) - cx), abs(int(iy) - cy)
        h = (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)
        assert h <= truth[0] + truth[1] * SQRT2 + 1e-9


def test_path_never_enters_occupied(gen_scene, gen_grid):
    poi = gen_scene.pois[0]
    start = (5.0, 12.5)
    path = plan_path(gen_grid, start, poi.entrances[0])
    inflated = gen_grid.inflated()
    for p in path.waypoints:
        assert inflated.is_free_world(p)
