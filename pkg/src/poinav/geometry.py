"""Planar geometry helpers shared by the scene model, grid and renderer.

Polygons are sequences of (x, y) vertices. Convex polygons are normalized
to counter-clockwise order so half-plane tests can assume orientation.
"""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to [-pi, pi)."""
    a = math.fmod(a + math.pi, TWO_PI)
    if a < 0:
        a += TWO_PI
    return a - math.pi


def poly_area(verts) -> float:
    """Signed shoelace area (positive for counter-clockwise order)."""
    s = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def ensure_ccw(verts):
    return tuple(tuple(map(float, v)) for v in (verts if poly_area(verts) >= 0 else list(verts)[::-1]))


def is_convex(verts) -> bool:
    """True if the (>=3 vertex) polygon turns consistently; collinear edges allowed."""
    n = len(verts)
    if n < 3:
        return False
    sign = 0
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cx, cy = verts[(i + 2) % n]
        cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if abs(cross) < 1e-12:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def point_in_convex(p, verts, tol: float = 1e-9) -> bool:
    """Point-in-CCW-convex-polygon test, boundary inclusive."""
    x, y = p
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        if (bx - ax) * (y - ay) - (by - ay) * (x - ax) < -tol:
            return False
    return True


def points_in_convex(xs: np.ndarray, ys: np.ndarray, verts, tol: float = 1e-9) -> np.ndarray:
    """Vectorized boundary-inclusive membership for a CCW convex polygon."""
    inside = np.ones(xs.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        inside &= (bx - ax) * (ys - ay) - (by - ay) * (xs - ax) >= -tol
    return inside


def clip_convex(subject, clip):
    """Sutherland-Hodgman clip of a convex subject by a CCW convex polygon."""
    output = [tuple(v) for v in subject]
    n = len(clip)
    for i in range(n):
        if not output:
            return []
        ax, ay = clip[i]
        bx, by = clip[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        inputs, output = output, []
        prev = inputs[-1]
        prev_in = ex * (prev[1] - ay) - ey * (prev[0] - ax) >= 0
        for cur in inputs:
            cur_in = ex * (cur[1] - ay) - ey * (cur[0] - ax) >= 0
            if cur_in != prev_in:
                dx, dy = cur[0] - prev[0], cur[1] - prev[1]
                denom = ex * dy - ey * dx
                if abs(denom) > 1e-15:
                    t = (ey * (prev[0] - ax) - ex * (prev[1] - ay)) / denom
                    output.append((prev[0] + t * dx, prev[1] + t * dy))
            if cur_in:
                output.append(cur)
            prev, prev_in = cur, cur_in
    return output


def convex_overlap_area(a, b) -> float:
    """Area of the intersection of two convex polygons (CCW)."""
    clipped = clip_convex(a, b)
    if len(clipped) < 3:
        return 0.0
    return abs(poly_area(clipped))


def segment_in_convex_interval(p0, p1, verts):
    """Parameter interval [t0, t1] of segment p0->p1 inside a CCW convex
    polygon, or None if it misses. Half-plane clipping (slab method)."""
    t0, t1 = 0.0, 1.0
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    n = len(verts)
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        # inside means cross(edge, p - a) >= 0
        num = ex * (p0[1] - ay) - ey * (p0[0] - ax)
        den = ex * dy - ey * dx
        if abs(den) < 1e-15:
            if num < 0:
                return None
            continue
        t = -num / den
        if den > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return (t0, t1)


def segment_intersects_convex(p0, p1, verts) -> bool:
    return segment_in_convex_interval(p0, p1, verts) is not None


def dist_point_to_segment(p, a, b) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 < 1e-18:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / L2))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))
