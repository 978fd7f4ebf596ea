"""Reference-path planning: deterministic 8-connected A* on the inflated grid.

Costs are 1 per axial move and sqrt(2) per diagonal, in cells. The heuristic
is octile distance to the goal set's bounding box (admissible and consistent
for any goal inside the box). Ties break on (f, h, iy, ix) so equal inputs
always produce the same waypoint sequence.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoPathError, StartBlockedError
from .jsonio import q6
from .navgrid import FREE, OccupancyGrid
from .scene import EntranceRegion

SQRT2 = math.sqrt(2.0)
DEFAULT_GOAL_EPSILON = 2.0

_MOVES = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
)


@dataclass(frozen=True)
class ReferencePath:
    waypoints: tuple[tuple[float, float], ...]
    length_m: float

    def to_doc(self) -> dict:
        return {
            "format_version": 1,
            "length_m": q6(self.length_m),
            "waypoints": [[q6(x), q6(y)] for x, y in self.waypoints],
        }

    @staticmethod
    def from_doc(doc: dict) -> "ReferencePath":
        return ReferencePath(
            waypoints=tuple((float(x), float(y)) for x, y in doc["waypoints"]),
            length_m=float(doc["length_m"]),
        )


def path_length_m(waypoints, resolution: float) -> float:
    """Canonical length: count axial/diagonal grid moves, then scale once.

    Any two cost-optimal 8-connected paths share the same move counts, so this
    is reproducible regardless of which optimal path the search returned.
    """
    axial = diag = 0
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        if abs(x1 - x0) > 1e-9 and abs(y1 - y0) > 1e-9:
            diag += 1
        else:
            axial += 1
    return (axial + diag * SQRT2) * resolution


def goal_cells(grid: OccupancyGrid, region: EntranceRegion, epsilon: float) -> list[tuple[int, int]]:
    """Free cells whose center is within epsilon of the entrance region,
    i.e. exactly where the success predicate starts holding."""
    cells = grid.cells
    ny, nx = cells.shape
    res = grid.resolution
    corners = region.corners()
    min_x = min(c[0] for c in corners) - epsilon
    max_x = max(c[0] for c in corners) + epsilon
    min_y = min(c[1] for c in corners) - epsilon
    max_y = max(c[1] for c in corners) + epsilon
    i0 = max(0, int(math.floor((min_x - grid.origin[0]) / res)))
    i1 = min(nx - 1, int(math.ceil((max_x - grid.origin[0]) / res)))
    j0 = max(0, int(math.floor((min_y - grid.origin[1]) / res)))
    j1 = min(ny - 1, int(math.ceil((max_y - grid.origin[1]) / res)))
    out = []
    for iy in range(j0, j1 + 1):
        for ix in range(i0, i1 + 1):
            if cells[iy, ix] != FREE:
                continue
            if region.distance_to(grid.cell_center(ix, iy)) <= epsilon:
                out.append((ix, iy))
    return out


def _octile(dx: int, dy: int) -> float:
    dx, dy = abs(dx), abs(dy)
    return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)


def plan_path(
    grid: OccupancyGrid,
    start: tuple[float, float],
    goal_region: EntranceRegion,
    epsilon: float = DEFAULT_GOAL_EPSILON,
) -> ReferencePath:
    """Minimum-cost path from the start cell to the nearest goal cell.

    Raises StartBlockedError if the start cell is not free after inflation,
    NoPathError if no free goal cell is reachable.
    """
    inflated = grid.inflated()
    six, siy = inflated.world_to_cell(start)
    if not inflated.is_free(six, siy):
        raise StartBlockedError(f"start {start} maps to a non-free cell ({six}, {siy})")

    goals = goal_cells(inflated, goal_region, epsilon)
    if not goals:
        raise NoPathError(f"no free cell within {epsilon} m of the goal region")
    goal_set = set(goals)
    gx0 = min(g[0] for g in goals)
    gx1 = max(g[0] for g in goals)
    gy0 = min(g[1] for g in goals)
    gy1 = max(g[1] for g in goals)

    def heuristic(ix: int, iy: int) -> float:
        cx = min(max(ix, gx0), gx1)
        cy = min(max(iy, gy0), gy1)
        return _octile(ix - cx, iy - cy)

    cells = inflated.cells
    ny, nx = cells.shape
    g_score = np.full((ny, nx), np.inf)
    g_score[siy, six] = 0.0
    came: dict[tuple[int, int], tuple[int, int]] = {}
    closed = np.zeros((ny, nx), dtype=bool)
    h0 = heuristic(six, siy)
    open_heap = [(h0, h0, siy, six)]

    end = None
    while open_heap:
        f, h, iy, ix = heapq.heappop(open_heap)
        if closed[iy, ix]:
            continue
        closed[iy, ix] = True
        if (ix, iy) in goal_set:
            end = (ix, iy)
            break
        g = g_score[iy, ix]
        for dx, dy, c in _MOVES:
            jx, jy = ix + dx, iy + dy
            if not (0 <= jx < nx and 0 <= jy < ny) or cells[jy, jx] != FREE or closed[jy, jx]:
                continue
            ng = g + c
            if ng < g_score[jy, jx] - 1e-12:
                g_score[jy, jx] = ng
                came[(jx, jy)] = (ix, iy)
                nh = heuristic(jx, jy)
                heapq.heappush(open_heap, (ng + nh, nh, jy, jx))

    if end is None:
        raise NoPathError("start and goal lie in different free-space components")

    cell_path = [end]
    while cell_path[-1] != (six, siy):
        cell_path.append(came[cell_path[-1]])
    cell_path.reverse()
    waypoints = tuple(inflated.cell_center(ix, iy) for ix, iy in cell_path)
    return ReferencePath(waypoints=waypoints, length_m=path_length_m(waypoints, grid.resolution))
