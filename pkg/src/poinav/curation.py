"""Geometric/physical validity checks over grounded signage-entrance pairs.

Each candidate (pose, POI) is grounded, the predicted entrance box is
validated against physics (no floating boxes, no boxes on blank wall), and
the straight approach from the pose to the entrance is checked for flatness,
obstacles, sidewalk origin, and street crossings. A record is accepted only
when every check passes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .brain import BrainNoise, ground
from .episode import Pose
from .geometry import segment_in_convex_interval
from .jsonio import q6, stable_hash
from .judge import _region_mask, _sample_window, box_ground_footprint
from .navgrid import OccupancyGrid
from .render import CameraModel, RasterBox, camera_origin, render
from .scene import EntranceRegion, Scene

FLOATING_TOL_M = 0.3  # box bottom edge may sit at most this far above ground
PLANE_TOL_M = 0.15  # height variation allowed along the approach segment
_APPROACH_SAMPLE_M = 0.01


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    reason: str | None = None


@dataclass(frozen=True)
class PairRecord:
    scene_id: str
    pose: tuple[float, float, float]
    poi_id: str | None
    signage_box: tuple | None
    entrance_box: tuple | None
    checks: dict
    accepted: bool

    def to_doc(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "pose": [q6(v) for v in self.pose],
            "poi_id": self.poi_id,
            "signage_box": list(self.signage_box) if self.signage_box else None,
            "entrance_box": list(self.entrance_box) if self.entrance_box else None,
            "checks": dict(self.checks),
            "accepted": self.accepted,
        }


def _first_hit_height_above_ground(scene: Scene, pose, camera: CameraModel, col: float, row: float):
    """Back-project a raster point along its ray to the first geometry hit;
    returns the hit's height above local ground, or None if the ray escapes."""
    from .geometry import segment_in_convex_interval

    cam3 = camera_origin(scene, pose, camera)
    bearing = pose.heading + camera.hfov / 2 - col * camera.hfov / camera.n_columns
    elev = camera.vfov / 2 - row * camera.vfov / camera.n_rows
    d = (math.cos(bearing) * math.cos(elev), math.sin(bearing) * math.cos(elev), math.sin(elev))
    far = (cam3[0] + d[0] * camera.max_range, cam3[1] + d[1] * camera.max_range)

    t_hit = math.inf
    for ob in scene.obstacles:
        span = segment_in_convex_interval((cam3[0], cam3[1]), far, ob.footprint)
        if span is None:
            continue
        t0, t1 = span[0] * camera.max_range, span[1] * camera.max_range
        cx = sum(v[0] for v in ob.footprint) / len(ob.footprint)
        cy = sum(v[1] for v in ob.footprint) / len(ob.footprint)
        base = scene.ground(cx, cy)
        z0, z1 = base, base + ob.height
        za, zb = cam3[2] + d[2] * t0, cam3[2] + d[2] * t1
        if min(za, zb) > z1 or max(za, zb) < z0:
            continue
        t = t0
        if abs(d[2]) > 1e-12:
            # earliest t inside [t0, t1] whose z lies within the prism span
            t_enter_z = (z1 - cam3[2]) / d[2] if d[2] < 0 else (z0 - cam3[2]) / d[2]
            t = max(t0, min(t1, max(t0, t_enter_z)))
        if 1e-9 < t < t_hit:
            t_hit = t

    if scene.max_ground() > min(cam3[2], cam3[2] + d[2] * camera.max_range) - 1e-9 or d[2] < 0:
        step = scene.resolution_m / 2
        n = int(min(camera.max_range, t_hit if math.isfinite(t_hit) else camera.max_range) / step)
        if n > 0:
            ts = (np.arange(1, n + 1)) * step
            xs = cam3[0] + d[0] * ts
            ys = cam3[1] + d[1] * ts
            zs = cam3[2] + d[2] * ts
            inside = (xs >= 0) & (xs <= scene.extent[0]) & (ys >= 0) & (ys <= scene.extent[1])
            hit = inside & (zs <= scene.ground(xs, ys))
            if hit.any():
                t_hit = min(t_hit, float(ts[np.argmax(hit)]))

    if math.isinf(t_hit):
        return None
    hx, hy, hz = cam3[0] + d[0] * t_hit, cam3[1] + d[1] * t_hit, cam3[2] + d[2] * t_hit
    return hz - scene.ground(hx, hy)


def validate_box(box: RasterBox, pose, scene: Scene, camera: CameraModel | None = None) -> CheckResult:
    """Physical plausibility of a predicted entrance box.

    fail("floating"): the bottom edge back-projects more than FLOATING_TOL_M
    above local ground (or never reaches geometry).
    fail("wall"): the box's ground footprint overlaps no entrance region of
    any POI, i.e. the prediction sits on blank wall.
    """
    camera = camera or CameraModel()
    h = _first_hit_height_above_ground(scene, pose, camera, 0.5 * (box.x0 + box.x1), box.y1)
    if h is None or h > FLOATING_TOL_M:
        return CheckResult(False, "floating")
    # overlap can only happen inside the box's own footprint window
    xs, ys = _sample_window(scene, pose, camera, box, include_entrances=False)
    footprint = box_ground_footprint(scene, pose, camera, box, xs, ys)
    for poi in scene.pois:
        for ent in poi.entrances:
            if (footprint & _region_mask(xs, ys, ent)).any():
                return CheckResult(True)
    return CheckResult(False, "wall")


def traversability_check(
    pose, entrance: EntranceRegion, scene: Scene, grid: OccupancyGrid
) -> CheckResult:
    """Straight-segment approach validity, first failed clause wins:
    (a) horizontal-plane  height varies more than PLANE_TOL_M along the way;
    (b) obstacle          the segment crosses an obstacle footprint;
    (c) off-road          the pose does not lie on a sidewalk;
    (d) street-crossing   the segment crosses a road polygon.
    """
    p0 = (pose.x, pose.y) if hasattr(pose, "x") else (pose[0], pose[1])
    p1 = entrance.center()
    length = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
    n = max(2, int(math.ceil(length / _APPROACH_SAMPLE_M)))
    ts = np.linspace(0.0, 1.0, n)
    xs = p0[0] + ts * (p1[0] - p0[0])
    ys = p0[1] + ts * (p1[1] - p0[1])
    heights = scene.ground(xs, ys)
    if float(heights.max() - heights.min()) > PLANE_TOL_M:
        return CheckResult(False, "horizontal-plane")
    for ob in scene.obstacles:
        if segment_in_convex_interval(p0, p1, ob.footprint) is not None:
            return CheckResult(False, "obstacle")
    from .geometry import point_in_convex

    if not any(point_in_convex(p0, poly) for poly in scene.sidewalks):
        return CheckResult(False, "off-road")
    for poly in scene.roads:
        if segment_in_convex_interval(p0, p1, poly) is not None:
            return CheckResult(False, "street-crossing")
    return CheckResult(True)


def _nearest_entrance(poi, p):
    return min(poi.entrances, key=lambda e: e.distance_to(p))


def curate(
    scene: Scene,
    poses: list,
    noise: BrainNoise,
    seed: int,
    grid: OccupancyGrid | None = None,
    camera: CameraModel | None = None,
) -> list[PairRecord]:
    """Ground every visible POI from every pose and record all verdicts.

    Deterministic in (scene, poses, noise parameters, seed): each (pose, POI)
    gets its own derived noise stream.
    """
    from .episode import default_grid

    camera = camera or CameraModel()
    grid = grid if grid is not None else default_grid(scene)
    records: list[PairRecord] = []
    for pi, pose in enumerate(poses):
        pose = pose if hasattr(pose, "x") else Pose(pose[0], pose[1], pose[2])
        obs = render(scene, pose, camera)
        visible = [b.poi_id for b in obs.boxes if b.kind == "signage" and b.fraction > 0]
        for poi_id in visible:
            poi = scene.poi_by_id(poi_id)
            pair_noise = noise.reseeded((seed ^ stable_hash(f"{pi}/{poi_id}")) & 0x7FFFFFFFFFFFFFFF)
            g = ground(obs, poi.name, scene, pair_noise, camera)
            checks: dict = {"grounded": g.stage != "not_found"}
            sbox = ebox = None
            if g.signage_box is not None:
                sbox = (g.signage_box.x0, g.signage_box.y0, g.signage_box.x1, g.signage_box.y1)
                checks["signage_box_in_raster"] = (
                    0 <= g.signage_box.x0 <= camera.n_columns and 0 <= g.signage_box.y1 <= camera.n_rows
                )
            else:
                checks["signage_box_in_raster"] = False
            if g.entrance_box is not None:
                ebox = (g.entrance_box.x0, g.entrance_box.y0, g.entrance_box.x1, g.entrance_box.y1)
                v = validate_box(g.entrance_box, pose, scene, camera)
                checks["entrance_box_valid"] = v.passed
                if not v.passed:
                    checks["entrance_box_reason"] = v.reason
            else:
                checks["entrance_box_valid"] = False
            ent = _nearest_entrance(poi, (pose.x, pose.y))
            tv = traversability_check(pose, ent, scene, grid)
            checks["approach_valid"] = tv.passed
            if not tv.passed:
                checks["approach_reason"] = tv.reason
            accepted = all(v for k, v in checks.items() if isinstance(v, bool))
            records.append(
                PairRecord(
                    scene_id=scene.id,
                    pose=(q6(pose.x), q6(pose.y), q6(pose.heading)),
                    poi_id=g.poi_id,
                    signage_box=sbox,
                    entrance_box=ebox,
                    checks=checks,
                    accepted=accepted,
                )
            )
    return records


def write_jsonl(records: list[PairRecord], path) -> None:
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r.to_doc(), sort_keys=True) + "\n")
