"""Deterministic geometric judge for grounding predictions.

A predicted raster box is back-projected to the ground patch it actually
denotes from the camera pose (rays that leave the fields of view, exceed
range, or are occluded contribute nothing), then compared against the
annotated entrance regions:

  rc        the footprint overlaps an entrance of the queried POI (IoU gate);
  gq        rc, plus the footprint reasonably covers the in-view part of that
            entrance and does not claim any other POI's entrance;
  ambiguous rc while also overlapping someone else's entrance.

Thresholds are explicit because the underlying notions ("points to",
"reasonably covers") are qualitative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .render import CameraModel, RasterBox, camera_origin, project_points, segments_blocked
from .scene import POI, EntranceRegion, Scene

JUDGE_SAMPLE_RES = 0.05  # m between footprint samples
MAX_WINDOW_SAMPLES = 250_000


@dataclass(frozen=True)
class JudgeThresholds:
    iou_rc: float = 0.1
    cover_min: float = 0.3
    iou_other: float = 0.05


@dataclass(frozen=True)
class JudgeVerdict:
    rc: bool
    gq: bool
    ambiguous: bool

    def to_doc(self) -> dict:
        return {"rc": self.rc, "gq": self.gq, "ambiguous": self.ambiguous}


def _region_mask(xs: np.ndarray, ys: np.ndarray, region: EntranceRegion) -> np.ndarray:
    (ux, uy), (nx_, ny_), L = region.frame()
    rx = xs - region.flush_a[0]
    ry = ys - region.flush_a[1]
    u = rx * ux + ry * uy
    v = rx * nx_ + ry * ny_
    return (u >= 0) & (u <= L) & (v >= 0) & (v <= region.depth)


def _pred_ground_bbox(scene: Scene, pose, camera: CameraModel, box: RasterBox) -> tuple:
    """Rough world bbox of the box's ground back-projection (flat-ground
    estimate, used only to size the sampling window)."""
    cam_z = camera_origin(scene, pose, camera)[2]
    g0 = scene.ground(pose.x, pose.y)
    pts = []
    for col in (box.x0, box.x1):
        bearing = pose.heading + camera.hfov / 2 - col * camera.hfov / camera.n_columns
        for row in (box.y0, box.y1):
            elev = camera.vfov / 2 - row * camera.vfov / camera.n_rows
            if elev >= -1e-4:
                d = camera.max_range
            else:
                d = min(camera.max_range, (cam_z - g0) / math.tan(-elev))
            pts.append((pose.x + d * math.cos(bearing), pose.y + d * math.sin(bearing)))
    xs = [p[0] for p in pts] + [pose.x]
    ys = [p[1] for p in pts] + [pose.y]
    return min(xs), min(ys), max(xs), max(ys)


def _sample_window(scene: Scene, pose, camera: CameraModel, box: RasterBox | None,
                   include_entrances: bool = True):
    x0, y0 = scene.extent[0], scene.extent[1]
    x1, y1 = 0.0, 0.0
    if include_entrances:
        for poi in scene.pois:
            for ent in poi.entrances:
                for cx, cy in ent.corners():
                    x0, y0 = min(x0, cx), min(y0, cy)
                    x1, y1 = max(x1, cx), max(y1, cy)
    if box is not None:
        bx0, by0, bx1, by1 = _pred_ground_bbox(scene, pose, camera, box)
        x0, y0 = min(x0, bx0), min(y0, by0)
        x1, y1 = max(x1, bx1), max(y1, by1)
    pad = 0.5
    x0 = max(0.0, x0 - pad)
    y0 = max(0.0, y0 - pad)
    x1 = min(scene.extent[0], x1 + pad)
    y1 = min(scene.extent[1], y1 + pad)
    res = JUDGE_SAMPLE_RES
    count = ((x1 - x0) / res + 1) * ((y1 - y0) / res + 1)
    if count > MAX_WINDOW_SAMPLES:
        res = math.sqrt((x1 - x0) * (y1 - y0) / MAX_WINDOW_SAMPLES)
    xs = np.arange(x0 + res / 2, x1, res)
    ys = np.arange(y0 + res / 2, y1, res)
    XS, YS = np.meshgrid(xs, ys)
    return XS.ravel(), YS.ravel()


def _visible_mask(scene: Scene, pose, camera: CameraModel, xs, ys) -> np.ndarray:
    cam3 = camera_origin(scene, pose, camera)
    pts = np.stack([xs, ys, scene.ground(xs, ys)], axis=1)
    cols, rows, dist, in_fov = project_points(pose, camera, cam3[2], pts)
    vis = in_fov.copy()
    idx = np.flatnonzero(vis)
    if len(idx):
        vis[idx] &= ~segments_blocked(scene, cam3, pts[idx])
    return vis, cols, rows


def box_ground_footprint(scene: Scene, pose, camera: CameraModel, box: RasterBox, xs, ys) -> np.ndarray:
    """Mask of ground samples that the raster box denotes: the sample
    projects into the box and its sight line actually reaches the ground."""
    vis, cols, rows = _visible_mask(scene, pose, camera, xs, ys)
    return (
        vis
        & (cols >= box.x0 - 1e-9)
        & (cols <= box.x1 + 1e-9)
        & (rows >= box.y0 - 1e-9)
        & (rows <= box.y1 + 1e-9)
    )


def _iou(a: np.ndarray, b: np.ndarray) -> float:
    union = (a | b).sum()
    if union == 0:
        return 0.0
    return float((a & b).sum()) / float(union)


def judge(
    pred,
    queried: POI,
    scene: Scene,
    pose,
    camera: CameraModel | None = None,
    thresholds: JudgeThresholds | None = None,
) -> JudgeVerdict:
    """Judge one prediction against the queried POI's annotated entrances.

    `pred` is a RasterBox (back-projected from the pose) or an EntranceRegion
    treated as a world-space box. Any entrance of the queried POI is a valid
    referent; coverage is measured against the part of that entrance in view.
    """
    camera = camera or CameraModel()
    th = thresholds or JudgeThresholds()

    raster = pred if isinstance(pred, RasterBox) else None
    xs, ys = _sample_window(scene, pose, camera, raster)
    if raster is not None:
        pred_mask = box_ground_footprint(scene, pose, camera, raster, xs, ys)
    else:
        pred_mask = _region_mask(xs, ys, pred)
    vis, _, _ = _visible_mask(scene, pose, camera, xs, ys)

    best_iou = 0.0
    best_cover = 0.0
    for ent in queried.entrances:
        ent_mask = _region_mask(xs, ys, ent)
        iou = _iou(pred_mask, ent_mask)
        in_view = ent_mask & vis
        denom = int(in_view.sum())
        cover = float((pred_mask & in_view).sum()) / denom if denom else 0.0
        if iou > best_iou or (iou == best_iou and cover > best_cover):
            best_iou, best_cover = iou, cover

    other_overlap = False
    for poi in scene.pois:
        if poi.id == queried.id:
            continue
        for ent in poi.entrances:
            if _iou(pred_mask, _region_mask(xs, ys, ent)) > th.iou_other:
                other_overlap = True
                break
        if other_overlap:
            break

    rc = best_iou >= th.iou_rc
    gq = rc and best_cover >= th.cover_min and not other_overlap
    return JudgeVerdict(rc=rc, gq=gq, ambiguous=rc and other_overlap)


def aggregate_verdicts(verdicts) -> dict:
    """Summary row: RC / GQ percentages plus the two failure buckets."""
    n = len(verdicts)
    if n == 0:
        return {"n": 0, "rc_pct": 0.0, "gq_pct": 0.0, "referential_error_pct": 0.0, "ambiguous_pct": 0.0}
    rc = sum(v.rc for v in verdicts)
    gq = sum(v.gq for v in verdicts)
    amb = sum(v.ambiguous for v in verdicts)
    return {
        "n": n,
        "rc_pct": 100.0 * rc / n,
        "gq_pct": 100.0 * gq / n,
        "referential_error_pct": 100.0 * (n - rc) / n,
        "ambiguous_pct": 100.0 * amb / n,
    }
