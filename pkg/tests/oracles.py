"""Independent reference implementations used only to check the package:
a plain Dijkstra with exact move-count costs, a millimeter disc re-sweep,
and dense boundary sampling for point-to-rectangle distance. These must not
share code with the modules they verify."""
import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def dijkstra_counts(cells: np.ndarray, start, goals):
    """Exact shortest 8-connected cost from start to the nearest goal as an
    (axial, diagonal) move-count pair; None if unreachable. cells: 0 = free."""
    ny, nx = cells.shape
    goal_set = set(goals)
    if cells[start[1], start[0]] != 0:
        return None
    dist = {(start[0], start[1]): (0, 0)}
    heap = [(0.0, start[0], start[1])]
    seen = set()
    while heap:
        d, x, y = heapq.heappop(heap)
        if (x, y) in seen:
            continue
        seen.add((x, y))
        if (x, y) in goal_set:
            return dist[(x, y)]
        a0, d0 = dist[(x, y)]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                jx, jy = x + dx, y + dy
                if not (0 <= jx < nx and 0 <= jy < ny) or cells[jy, jx] != 0:
                    continue
                if dx != 0 and dy != 0:
                    cand = (a0, d0 + 1)
                else:
                    cand = (a0 + 1, d0)
                cost = cand[0] + cand[1] * SQRT2
                prev = dist.get((jx, jy))
                if prev is None or cost < prev[0] + prev[1] * SQRT2 - 1e-9:
                    dist[(jx, jy)] = cand
                    heapq.heappush(heap, (cost, jx, jy))
    return None


def path_move_counts(waypoints):
    axial = diag = 0
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        if abs(x1 - x0) > 1e-9 and abs(y1 - y0) > 1e-9:
            diag += 1
        else:
            axial += 1
    return axial, diag


def disc_clear_at(cells, resolution, origin, center, radius):
    """Independent disc-vs-grid overlap check: clamp the center into every
    nearby cell square; blocked squares within the radius mean contact."""
    ox, oy = origin
    ny, nx = cells.shape
    span = int(math.ceil(radius / resolution)) + 1
    cx = int(math.floor((center[0] - ox) / resolution))
    cy = int(math.floor((center[1] - oy) / resolution))
    for jx in range(cx - span, cx + span + 1):
        for jy in range(cy - span, cy + span + 1):
            x0, y0 = ox + jx * resolution, oy + jy * resolution
            qx = min(max(center[0], x0), x0 + resolution)
            qy = min(max(center[1], y0), y0 + resolution)
            if (center[0] - qx) ** 2 + (center[1] - qy) ** 2 >= radius * radius - 1e-12:
                continue
            if not (0 <= jx < nx and 0 <= jy < ny):
                return False
            if cells[jy, jx] != 0:
                return False
    return True


def resweep_trajectory(cells, resolution, origin, trajectory, radius, step=0.001):
    """Millimeter re-sweep of a recorded trajectory; returns the number of
    positions where the swept disc touches a blocked cell. Same predicate as
    disc_clear_at, vectorized independently of the engine's sweep."""
    pts = []
    for (x0, y0, *_), (x1, y1, *_) in zip(trajectory, trajectory[1:]):
        length = math.hypot(x1 - x0, y1 - y0)
        n = max(1, int(math.ceil(length / step)))
        ts = np.arange(n + 1) / n
        pts.append(np.stack([x0 + ts * (x1 - x0), y0 + ts * (y1 - y0)], axis=1))
    if not pts:
        return 0
    centers = np.concatenate(pts, axis=0)
    ox, oy = origin
    ny, nx = cells.shape
    span = int(math.ceil(radius / resolution)) + 1
    cx = np.floor((centers[:, 0] - ox) / resolution).astype(np.int64)
    cy = np.floor((centers[:, 1] - oy) / resolution).astype(np.int64)
    bad = np.zeros(len(centers), dtype=bool)
    r2 = radius * radius
    for dx in range(-span, span + 1):
        for dy in range(-span, span + 1):
            jx = cx + dx
            jy = cy + dy
            x0 = ox + jx * resolution
            y0 = oy + jy * resolution
            qx = np.clip(centers[:, 0], x0, x0 + resolution)
            qy = np.clip(centers[:, 1], y0, y0 + resolution)
            near = (centers[:, 0] - qx) ** 2 + (centers[:, 1] - qy) ** 2 < r2 - 1e-12
            if not near.any():
                continue
            inside = (jx >= 0) & (jx < nx) & (jy >= 0) & (jy < ny)
            blocked = ~inside
            ji = np.flatnonzero(inside)
            if len(ji):
                blocked[ji] = cells[jy[ji], jx[ji]] != 0
            bad |= near & blocked
    return int(bad.sum())


def dense_rect_distance(p, corners, n=1000):
    """Distance to a rectangle via dense boundary sampling (0 if inside)."""
    import numpy as np

    cx = [c[0] for c in corners]
    cy = [c[1] for c in corners]

    def _inside(px, py):
        # rectangle given as 4 CCW corners
        for i in range(4):
            ax, ay = corners[i]
            bx, by = corners[(i + 1) % 4]
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) < -1e-12:
                return False
        return True

    if _inside(*p):
        return 0.0
    best = math.inf
    for i in range(4):
        ax, ay = corners[i]
        bx, by = corners[(i + 1) % 4]
        ts = np.linspace(0.0, 1.0, n)
        xs = ax + ts * (bx - ax)
        ys = ay + ts * (by - ay)
        d = np.hypot(xs - p[0], ys - p[1]).min()
        best = min(best, float(d))
    return best
