"""Egocentric column-raster renderer and visibility queries.

The observation is a structured raster, not pixels: one depth / instance /
glyph record per horizontal ray from a low-mounted camera with a limited
vertical field of view, plus image-space boxes for whatever signage and
entrance regions are in view. Column 0 is the leftmost ray; rows grow
downward from the top of the vertical field of view.

Everything here is a pure function of (scene, pose, camera); per-scene
geometry is prepared once and cached on the scene object.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jsonio import canonical_dumps, digest64, q6
from .scene import POI, Scene

DEFAULT_CAMERA_HEIGHT = 0.45
DEFAULT_HFOV_DEG = 90.0
DEFAULT_VFOV_DEG = 58.0
DEFAULT_COLUMNS = 256
DEFAULT_ROWS = 64
DEFAULT_MAX_RANGE = 50.0
VISIBILITY_SAMPLES = 8  # K: fractions are resolved on a KxK sample lattice

_T_EPS = 1e-6


@dataclass(frozen=True)
class CameraModel:
    height: float = DEFAULT_CAMERA_HEIGHT
    hfov: float = math.radians(DEFAULT_HFOV_DEG)
    vfov: float = math.radians(DEFAULT_VFOV_DEG)
    n_columns: int = DEFAULT_COLUMNS
    n_rows: int = DEFAULT_ROWS
    max_range: float = DEFAULT_MAX_RANGE

    def __post_init__(self):
        if not (0 < self.hfov < math.pi and 0 < self.vfov < math.pi):
            raise ValueError("fov out of range")
        if self.n_columns < 8:
            raise ValueError("n_columns must be >= 8")

    def to_doc(self) -> dict:
        return {
            "height": q6(self.height),
            "hfov_deg": q6(math.degrees(self.hfov)),
            "vfov_deg": q6(math.degrees(self.vfov)),
            "n_columns": self.n_columns,
            "n_rows": self.n_rows,
            "max_range": q6(self.max_range),
        }

    @staticmethod
    def from_doc(doc: dict) -> "CameraModel":
        return CameraModel(
            height=float(doc["height"]),
            hfov=math.radians(float(doc["hfov_deg"])),
            vfov=math.radians(float(doc["vfov_deg"])),
            n_columns=int(doc["n_columns"]),
            n_rows=int(doc["n_rows"]),
            max_range=float(doc["max_range"]),
        )


@dataclass(frozen=True)
class RasterBox:
    x0: float
    y0: float
    x1: float
    y1: float

    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))


@dataclass(frozen=True)
class PoiBox:
    poi_id: str
    kind: str  # "signage" | "entrance"
    box: RasterBox
    fraction: float


@dataclass(frozen=True)
class VisibilityReport:
    poi_id: str
    signage_fraction: float
    entrance_fraction: float
    signage_box: RasterBox | None
    entrance_box: RasterBox | None


@dataclass(frozen=True, eq=False)
class Observation:
    t: int
    depth: np.ndarray  # (n_columns,) meters, +inf when nothing within range
    instance: np.ndarray  # (n_columns,) 0 none, >0 obstacle id, <0 glass obstacle
    glyph: np.ndarray  # (n_columns,) signage glyph id or 0
    boxes: tuple[PoiBox, ...]

    def to_doc(self) -> dict:
        return {
            "t": self.t,
            "columns": {
                "depth": [None if math.isinf(d) else float(d) for d in self.depth.tolist()],
                "instance": self.instance.tolist(),
                "glyph": self.glyph.tolist(),
            },
            "boxes": [
                {
                    "poi": b.poi_id,
                    "kind": b.kind,
                    "x0": float(b.box.x0),
                    "y0": float(b.box.y0),
                    "x1": float(b.box.x1),
                    "y1": float(b.box.y1),
                    "fraction": float(b.fraction),
                }
                for b in self.boxes
            ],
        }

    def digest(self) -> str:
        return digest64(canonical_dumps(self.to_doc()))

    def box_for(self, poi_id: str, kind: str) -> PoiBox | None:
        for b in self.boxes:
            if b.poi_id == poi_id and b.kind == kind:
                return b
        return None


def observation_from_doc(doc: dict) -> Observation:
    cols = doc["columns"]
    depth = np.array([math.inf if d is None else float(d) for d in cols["depth"]], dtype=np.float64)
    return Observation(
        t=int(doc["t"]),
        depth=depth,
        instance=np.asarray(cols["instance"], dtype=np.int64),
        glyph=np.asarray(cols["glyph"], dtype=np.int64),
        boxes=tuple(
            PoiBox(
                poi_id=str(b["poi"]),
                kind=str(b["kind"]),
                box=RasterBox(float(b["x0"]), float(b["y0"]), float(b["x1"]), float(b["y1"])),
                fraction=float(b["fraction"]),
            )
            for b in doc["boxes"]
        ),
    )


# -- cached per-scene geometry -------------------------------------------------


@dataclass(eq=False)
class _ScenePrep:
    edge_p0: np.ndarray  # (E, 2)
    edge_vec: np.ndarray  # (E, 2)
    edge_z0: np.ndarray  # (E,)
    edge_z1: np.ndarray  # (E,)
    edge_instance: np.ndarray  # (E,) signed instance id
    groups: list  # [(verts (O, m, 2), z0 (O,), z1 (O,))] obstacles grouped by vertex count
    hf_max: float
    poi_samples: dict  # poi id -> (sign_pts, entrance_pts)


def _prep(scene: Scene) -> _ScenePrep:
    prep = getattr(scene, "_render_prep", None)
    if prep is not None:
        return prep
    p0, vec, z0s, z1s, inst = [], [], [], [], []
    by_count: dict[int, list] = {}
    for i, ob in enumerate(scene.obstacles):
        verts = np.asarray(ob.footprint, dtype=np.float64)
        cx = float(verts[:, 0].mean())
        cy = float(verts[:, 1].mean())
        base = scene.ground(cx, cy)
        z0, z1 = base, base + ob.height
        by_count.setdefault(len(verts), []).append((verts, z0, z1))
        sid = -(i + 1) if ob.kind == "glass" else (i + 1)
        n = len(verts)
        for j in range(n):
            a = verts[j]
            b = verts[(j + 1) % n]
            p0.append(a)
            vec.append(b - a)
            z0s.append(z0)
            z1s.append(z1)
            inst.append(sid)
    groups = [
        (
            np.stack([v for v, _, _ in items]),
            np.asarray([z0 for _, z0, _ in items]),
            np.asarray([z1 for _, _, z1 in items]),
        )
        for items in by_count.values()
    ]
    prep = _ScenePrep(
        edge_p0=np.asarray(p0, dtype=np.float64).reshape(-1, 2),
        edge_vec=np.asarray(vec, dtype=np.float64).reshape(-1, 2),
        edge_z0=np.asarray(z0s, dtype=np.float64),
        edge_z1=np.asarray(z1s, dtype=np.float64),
        edge_instance=np.asarray(inst, dtype=np.int64),
        groups=groups,
        hf_max=scene.max_ground(),
        poi_samples={poi.id: _poi_sample_points(poi, VISIBILITY_SAMPLES) for poi in scene.pois},
    )
    object.__setattr__(scene, "_render_prep", prep)
    return prep


# -- projection helpers ---------------------------------------------------------


def camera_origin(scene: Scene, pose, camera: CameraModel) -> tuple[float, float, float]:
    return (pose.x, pose.y, scene.ground(pose.x, pose.y) + camera.height)


def column_bearings(pose, camera: CameraModel) -> np.ndarray:
    i = np.arange(camera.n_columns)
    return pose.heading + camera.hfov / 2 - (i + 0.5) * camera.hfov / camera.n_columns


def project_points(pose, camera: CameraModel, cam_z: float, pts: np.ndarray):
    """Project world points (n, 3) into (col, row, horizontal distance) and an
    in-field-of-view mask. Occlusion is not considered here."""
    dx = pts[:, 0] - pose.x
    dy = pts[:, 1] - pose.y
    dist = np.hypot(dx, dy)
    delta = np.mod(np.arctan2(dy, dx) - pose.heading + math.pi, 2 * math.pi) - math.pi
    with np.errstate(invalid="ignore", divide="ignore"):
        elev = np.arctan2(pts[:, 2] - cam_z, dist)
    cols = (camera.hfov / 2 - delta) * camera.n_columns / camera.hfov
    rows = (camera.vfov / 2 - elev) * camera.n_rows / camera.vfov
    in_fov = (
        (dist > 1e-9)
        & (dist <= camera.max_range)
        & (np.abs(delta) <= camera.hfov / 2 + 1e-12)
        & (np.abs(elev) <= camera.vfov / 2 + 1e-12)
    )
    return cols, rows, dist, in_fov


def segments_blocked(scene: Scene, origin3, targets: np.ndarray) -> np.ndarray:
    """True where the 3D sight line origin->target is interrupted by an
    obstacle prism or by terrain. Endpoints are excluded by a small margin so
    targets sitting exactly on a face are not self-occluded."""
    prep = _prep(scene)
    n = len(targets)
    ox, oy, oz = origin3
    seg = targets[:, :2] - np.array([ox, oy])
    dz = targets[:, 2] - oz
    blocked = np.zeros(n, dtype=bool)

    for verts, z0, z1 in prep.groups:
        # verts: (O, m, 2). Clip the 2D segment parameter against each
        # obstacle's half-planes in one shot: inside(t) iff num + t*den >= 0.
        a = verts
        e = np.roll(verts, -1, axis=1) - verts  # (O, m, 2)
        num = e[:, :, 0] * (oy - a[:, :, 1]) - e[:, :, 1] * (ox - a[:, :, 0])  # (O, m)
        den = e[None, :, :, 0] * seg[:, None, None, 1] - e[None, :, :, 1] * seg[:, None, None, 0]
        parallel = np.abs(den) < 1e-15
        with np.errstate(divide="ignore", invalid="ignore"):
            tval = np.where(parallel, 0.0, -num[None, :, :] / den)
        t_lo = np.where(~parallel & (den > 0), tval, _T_EPS).max(axis=2)
        t_hi = np.where(~parallel & (den < 0), tval, 1.0 - _T_EPS).min(axis=2)
        t_lo = np.maximum(t_lo, _T_EPS)
        t_hi = np.minimum(t_hi, 1.0 - _T_EPS)
        feasible = (~parallel | (num[None, :, :] >= 0)).all(axis=2)
        crossing = feasible & (t_lo < t_hi)  # (n, O)
        if not crossing.any():
            continue
        za = oz + t_lo * dz[:, None]
        zb = oz + t_hi * dz[:, None]
        zlo = np.minimum(za, zb)
        zhi = np.maximum(za, zb)
        blocked |= (crossing & (zlo <= z1[None, :] - 1e-9) & (zhi >= z0[None, :] + 1e-9)).any(axis=1)

    # Terrain: only worth marching when the ground can reach the sight line.
    seg_min_z = np.minimum(oz, targets[:, 2])
    needs = (~blocked) & (prep.hf_max > seg_min_z + 1e-9)
    if needs.any():
        idx = np.flatnonzero(needs)
        sub = targets[idx]
        lengths = np.hypot(sub[:, 0] - ox, sub[:, 1] - oy)
        m = max(2, int(math.ceil(float(lengths.max()) / scene.resolution_m)))
        ts = (np.arange(m) + 0.5) / m
        xs = ox + ts[None, :] * (sub[:, 0, None] - ox)
        ys = oy + ts[None, :] * (sub[:, 1, None] - oy)
        zs = oz + ts[None, :] * (sub[:, 2, None] - oz)
        ground = scene.ground(xs, ys)
        blocked[idx] |= (zs < ground - 1e-6).any(axis=1)
    return blocked


# -- rendering -----------------------------------------------------------------


def _ray_hits(scene: Scene, origin3, dirs: np.ndarray, max_range: float):
    """Nearest obstacle hit per horizontal ray at camera height.

    Returns (depth, instance); depth is +inf where nothing is hit in range.
    """
    prep = _prep(scene)
    n = len(dirs)
    depth = np.full(n, np.inf)
    inst = np.zeros(n, dtype=np.int64)
    if len(prep.edge_p0) == 0:
        return depth, inst
    ox, oy, oz = origin3
    live = (prep.edge_z0 <= oz) & (oz <= prep.edge_z1)
    if not live.any():
        return depth, inst
    p0 = prep.edge_p0[live]
    e = prep.edge_vec[live]
    ids = prep.edge_instance[live]
    rel = p0 - np.array([ox, oy])  # (E, 2)
    den = dirs[:, 0, None] * e[None, :, 1] - dirs[:, 1, None] * e[None, :, 0]  # (n, E)
    cross_rel_e = rel[:, 0] * e[:, 1] - rel[:, 1] * e[:, 0]  # (E,)
    cross_rel_d = rel[None, :, 0] * dirs[:, 1, None] - rel[None, :, 1] * dirs[:, 0, None]  # (n, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_rel_e[None, :] / den
        s = cross_rel_d / den
    valid = (np.abs(den) > 1e-15) & (t > 1e-9) & (s >= -1e-12) & (s <= 1 + 1e-12) & (t <= max_range)
    t = np.where(valid, t, np.inf)
    best = np.argmin(t, axis=1)
    tbest = t[np.arange(n), best]
    hit = np.isfinite(tbest)
    depth[hit] = tbest[hit]
    inst[hit] = ids[best[hit]]
    return depth, inst


def _terrain_depths(scene: Scene, origin3, dirs: np.ndarray, max_range: float) -> np.ndarray:
    prep = _prep(scene)
    ox, oy, oz = origin3
    n = len(dirs)
    out = np.full(n, np.inf)
    if prep.hf_max <= oz + 1e-9:
        return out
    step = scene.resolution_m
    m = int(math.ceil(max_range / step))
    ts = (np.arange(m) + 0.5) * step
    xs = ox + dirs[:, 0, None] * ts[None, :]
    ys = oy + dirs[:, 1, None] * ts[None, :]
    ground = scene.ground(xs, ys)
    above = ground >= oz
    any_hit = above.any(axis=1)
    first = np.argmax(above, axis=1)
    out[any_hit] = ts[first[any_hit]]
    return out


def _poi_sample_points(poi: POI, k: int):
    """World-space sample lattices for one POI.

    Returns (sign plate KxK, flush segments k*k along each entrance's flush
    line, full-region KxK lattices). The flush samples define the entrance
    visibility fraction (can the doorway line be seen); the region samples
    extend the raster box to the full ground extent of the entrance.
    """
    sg = poi.signage
    (ax, ay), (bx, by) = sg.endpoints()
    z0, z1 = sg.z_range()
    u = (np.arange(k) + 0.5) / k
    su, sv = np.meshgrid(u, u)
    sign_pts = np.stack(
        [
            ax + (bx - ax) * su.ravel(),
            ay + (by - ay) * su.ravel(),
            z0 + (z1 - z0) * sv.ravel(),
        ],
        axis=1,
    )
    flush_parts = []
    region_parts = []
    uu = (np.arange(k * k) + 0.5) / (k * k)
    for ent in poi.entrances:
        (ux, uy), (nx_, ny_), L = ent.frame()
        fa = ent.flush_a
        flush_parts.append(
            np.stack(
                [
                    fa[0] + ux * uu * L,
                    fa[1] + uy * uu * L,
                    np.full(k * k, ent.elevation),
                ],
                axis=1,
            )
        )
        eu, ev = np.meshgrid(u * L, u * ent.depth)
        region_parts.append(
            np.stack(
                [
                    fa[0] + ux * eu.ravel() + nx_ * ev.ravel(),
                    fa[1] + uy * eu.ravel() + ny_ * ev.ravel(),
                    np.full(k * k, ent.elevation),
                ],
                axis=1,
            )
        )
    return sign_pts, np.concatenate(flush_parts, axis=0), np.concatenate(region_parts, axis=0)


def _box_of(cols: np.ndarray, rows: np.ndarray, mask: np.ndarray) -> RasterBox | None:
    if not mask.any():
        return None
    return RasterBox(
        x0=float(cols[mask].min()),
        y0=float(rows[mask].min()),
        x1=float(cols[mask].max()),
        y1=float(rows[mask].max()),
    )


def _visibility_many(scene: Scene, pose, camera: CameraModel, pois, k: int):
    if not pois:
        return []
    cam3 = camera_origin(scene, pose, camera)
    cached = _prep(scene).poi_samples if k == VISIBILITY_SAMPLES else {}
    chunks = []
    meta = []
    for poi in pois:
        sign_pts, flush_pts, region_pts = cached.get(poi.id) or _poi_sample_points(poi, k)
        meta.append((poi, len(sign_pts), len(flush_pts), len(region_pts)))
        chunks.extend((sign_pts, flush_pts, region_pts))
    pts = np.concatenate(chunks, axis=0)
    cols, rows, dist, in_fov = project_points(pose, camera, cam3[2], pts)
    visible = in_fov.copy()
    # Sign plates are one-sided: looking at the back does not count.
    off = 0
    for poi, ns, nf, nr in meta:
        fx, fy, _ = poi.signage.facing
        cx, cy, _ = poi.signage.center
        if fx * (pose.x - cx) + fy * (pose.y - cy) <= 1e-9:
            visible[off : off + ns] = False
        off += ns + nf + nr
    check = np.flatnonzero(visible)
    if len(check):
        visible[check] &= ~segments_blocked(scene, cam3, pts[check])

    reports = []
    off = 0
    for poi, ns, nf, nr in meta:
        smask = visible[off : off + ns]
        fmask = visible[off + ns : off + ns + nf]
        rmask = visible[off + ns + nf : off + ns + nf + nr]
        scols, srows = cols[off : off + ns], rows[off : off + ns]
        ent_fraction = float(fmask.sum()) / nf
        # Box presence is keyed to the flush fraction; its extent covers all
        # visible ground samples of the entrance (flush line plus region).
        ent_box = None
        if ent_fraction > 0:
            gcols = cols[off + ns : off + ns + nf + nr]
            grows = rows[off + ns : off + ns + nf + nr]
            gmask = np.concatenate([fmask, rmask])
            ent_box = _box_of(gcols, grows, gmask)
        reports.append(
            VisibilityReport(
                poi_id=poi.id,
                signage_fraction=float(smask.sum()) / ns,
                entrance_fraction=ent_fraction,
                signage_box=_box_of(scols, srows, smask),
                entrance_box=ent_box,
            )
        )
        off += ns + nf + nr
    return reports


def visibility(scene: Scene, pose, camera: CameraModel, poi: POI, k: int = VISIBILITY_SAMPLES) -> VisibilityReport:
    """Fraction of the sign plate / entrance region sample lattice that is
    inside both fields of view and unoccluded, with raster-space boxes of the
    visible samples."""
    return _visibility_many(scene, pose, camera, [poi], k)[0]


def _column_glyphs(scene: Scene, pose, camera: CameraModel, cam3, dirs: np.ndarray) -> np.ndarray:
    glyph = np.zeros(camera.n_columns, dtype=np.int64)
    best_t = np.full(camera.n_columns, np.inf)
    ox, oy, oz = cam3
    half_v = camera.vfov / 2
    probes = []
    for poi in scene.pois:
        sg = poi.signage
        fx, fy, _ = sg.facing
        (ax, ay), (bx, by) = sg.endpoints()
        if fx * (ox - ax) + fy * (oy - ay) <= 1e-9:
            continue
        ex, ey = bx - ax, by - ay
        den = dirs[:, 0] * ey - dirs[:, 1] * ex
        relx, rely = ax - ox, ay - oy
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (relx * ey - rely * ex) / den
            s = (relx * dirs[:, 1] - rely * dirs[:, 0]) / den
        valid = (np.abs(den) > 1e-15) & (t > 1e-9) & (s >= 0) & (s <= 1) & (t <= camera.max_range)
        if not valid.any():
            continue
        z0, z1 = sg.z_range()
        with np.errstate(invalid="ignore"):
            el_lo = np.arctan2(z0 - oz, t)
            el_hi = np.arctan2(z1 - oz, t)
        band_lo = np.maximum(el_lo, -half_v)
        band_hi = np.minimum(el_hi, half_v)
        valid &= band_lo <= band_hi
        cols = np.flatnonzero(valid)
        if not len(cols):
            continue
        tc = t[cols]
        zc = oz + tc * np.tan(0.5 * (band_lo[cols] + band_hi[cols]))
        pts = np.stack([ox + dirs[cols, 0] * tc, oy + dirs[cols, 1] * tc, zc], axis=1)
        probes.append((cols, tc, sg.text_glyph_id, pts))
    if probes:
        targets = np.concatenate([p[3] for p in probes], axis=0)
        blocked = segments_blocked(scene, cam3, targets)
        off = 0
        for cols, tc, gid, pts in probes:
            ok = ~blocked[off : off + len(cols)] & (tc < best_t[cols])
            best_t[cols[ok]] = tc[ok]
            glyph[cols[ok]] = gid
            off += len(cols)
    return glyph


def render(scene: Scene, pose, camera: CameraModel | None = None, t: int = 0) -> Observation:
    """Emit the observation for a pose: nearest intersection per column ray,
    per-column signage glyphs, and visibility boxes for every POI in view."""
    camera = camera or CameraModel()
    cam3 = camera_origin(scene, pose, camera)
    bearings = column_bearings(pose, camera)
    dirs = np.stack([np.cos(bearings), np.sin(bearings)], axis=1)

    depth, inst = _ray_hits(scene, cam3, dirs, camera.max_range)
    terrain = _terrain_depths(scene, cam3, dirs, camera.max_range)
    use_terrain = terrain < depth
    depth = np.where(use_terrain, terrain, depth)
    inst = np.where(use_terrain, 0, inst)

    glyph = _column_glyphs(scene, pose, camera, cam3, dirs)

    boxes = []
    for rep in _visibility_many(scene, pose, camera, scene.pois, VISIBILITY_SAMPLES):
        if rep.signage_fraction > 0:
            boxes.append(PoiBox(rep.poi_id, "signage", rep.signage_box, rep.signage_fraction))
        if rep.entrance_fraction > 0:
            boxes.append(PoiBox(rep.poi_id, "entrance", rep.entrance_box, rep.entrance_fraction))

    return Observation(t=t, depth=depth, instance=inst, glyph=glyph, boxes=tuple(boxes))
