"""World model: terrain heightfield, obstacle prisms, storefront POIs with
signage and ground-flush entrance regions, plus the canonical scene document
format.

Scenes are immutable after construction and safe to share across concurrent
episodes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError, ParseError
from .geometry import ensure_ccw, is_convex, poly_area
from .jsonio import FORMAT_VERSION, canonical_dumps, q6, write_canonical

HEIGHTFIELD_RESOLUTION = 0.1  # m/cell, shared with the occupancy grid
GROUND_FLUSH_TOL = 0.01  # m

POI_CATEGORIES = ("Dining", "Retail", "Medical&Health", "Service", "Entertainment")
OBSTACLE_KINDS = ("wall", "glass", "pole", "step", "planter")

Point2 = tuple[float, float]


@dataclass(frozen=True)
class Signage:
    """High-mounted sign plate; a vertical rectangle facing `facing`."""

    center: tuple[float, float, float]
    width: float
    height: float
    facing: tuple[float, float, float]
    text_glyph_id: int

    def lateral(self) -> Point2:
        """Horizontal unit direction along the plate width."""
        fx, fy, _ = self.facing
        return (-fy, fx)

    def endpoints(self) -> tuple[Point2, Point2]:
        ux, uy = self.lateral()
        cx, cy, _ = self.center
        h = 0.5 * self.width
        return (cx - ux * h, cy - uy * h), (cx + ux * h, cy + uy * h)

    def z_range(self) -> tuple[float, float]:
        return (self.center[2] - 0.5 * self.height, self.center[2] + 0.5 * self.height)


@dataclass(frozen=True)
class EntranceRegion:
    """Horizontal ground-flush rectangle: the flush segment (flush_a->flush_b)
    extruded `depth` meters along its left-hand normal."""

    flush_a: Point2
    flush_b: Point2
    depth: float
    elevation: float

    def frame(self) -> tuple[Point2, Point2, float]:
        """(unit along-edge, unit normal, edge length)."""
        dx = self.flush_b[0] - self.flush_a[0]
        dy = self.flush_b[1] - self.flush_a[1]
        L = math.hypot(dx, dy)
        return (dx / L, dy / L), (-dy / L, dx / L), L

    def corners(self) -> tuple[Point2, Point2, Point2, Point2]:
        (ux, uy), (nx, ny), L = self.frame()
        ax, ay = self.flush_a
        bx, by = self.flush_b
        d = self.depth
        return ((ax, ay), (bx, by), (bx + nx * d, by + ny * d), (ax + nx * d, ay + ny * d))

    def center(self) -> Point2:
        c = self.corners()
        return (sum(p[0] for p in c) / 4.0, sum(p[1] for p in c) / 4.0)

    def distance_to(self, p: Point2) -> float:
        """0 inside the rectangle, else Euclidean distance to its boundary."""
        (ux, uy), (nx, ny), L = self.frame()
        rx, ry = p[0] - self.flush_a[0], p[1] - self.flush_a[1]
        u = rx * ux + ry * uy
        v = rx * nx + ry * ny
        du = max(-u, 0.0, u - L)
        dv = max(-v, 0.0, v - self.depth)
        return math.hypot(du, dv)

    def contains(self, p: Point2) -> bool:
        return self.distance_to(p) == 0.0


@dataclass(frozen=True)
class Obstacle:
    footprint: tuple[Point2, ...]  # convex, CCW
    height: float
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "footprint", ensure_ccw(self.footprint))


@dataclass(frozen=True)
class POI:
    id: str
    name: str
    category: str
    signage: Signage
    entrances: tuple[EntranceRegion, ...]

    def distance_to(self, p: Point2) -> float:
        return min(e.distance_to(p) for e in self.entrances)


@dataclass(frozen=True, eq=False)
class Scene:
    id: str
    extent: tuple[float, float]  # width (x), depth (y) in meters
    resolution_m: float
    heights: np.ndarray  # (ny, nx) ground heights at cell centers
    obstacles: tuple[Obstacle, ...]
    roads: tuple[tuple[Point2, ...], ...]
    sidewalks: tuple[tuple[Point2, ...], ...]
    pois: tuple[POI, ...]

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=np.float64)
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)
        object.__setattr__(self, "roads", tuple(ensure_ccw(r) for r in self.roads))
        object.__setattr__(self, "sidewalks", tuple(ensure_ccw(s) for s in self.sidewalks))

    @property
    def metadata(self) -> dict:
        return {"area_m2": self.extent[0] * self.extent[1], "poi_count": len(self.pois)}

    def poi_by_id(self, poi_id: str) -> POI:
        for p in self.pois:
            if p.id == poi_id:
                return p
        raise KeyError(poi_id)

    def poi_by_name(self, name: str) -> POI | None:
        for p in self.pois:
            if p.name == name:
                return p
        return None

    def contains_point(self, p: Point2) -> bool:
        return 0.0 <= p[0] <= self.extent[0] and 0.0 <= p[1] <= self.extent[1]

    def ground(self, x, y):
        """Bilinear ground height; accepts scalars or arrays, clamps at edges."""
        h = self.heights
        ny, nx = h.shape
        res = self.resolution_m
        gx = np.clip(np.asarray(x) / res - 0.5, 0.0, nx - 1.0)
        gy = np.clip(np.asarray(y) / res - 0.5, 0.0, ny - 1.0)
        ix = np.clip(np.floor(gx).astype(np.int64), 0, nx - 2) if nx > 1 else np.zeros_like(gx, dtype=np.int64)
        iy = np.clip(np.floor(gy).astype(np.int64), 0, ny - 2) if ny > 1 else np.zeros_like(gy, dtype=np.int64)
        fx = gx - ix
        fy = gy - iy
        ix1 = np.minimum(ix + 1, nx - 1)
        iy1 = np.minimum(iy + 1, ny - 1)
        z = (
            h[iy, ix] * (1 - fx) * (1 - fy)
            + h[iy, ix1] * fx * (1 - fy)
            + h[iy1, ix] * (1 - fx) * fy
            + h[iy1, ix1] * fx * fy
        )
        return float(z) if np.isscalar(x) or np.asarray(x).ndim == 0 else z

    def max_ground(self) -> float:
        return float(self.heights.max())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scene):
            return NotImplemented
        return (
            self.id == other.id
            and self.extent == other.extent
            and self.resolution_m == other.resolution_m
            and np.array_equal(self.heights, other.heights)
            and self.obstacles == other.obstacles
            and self.roads == other.roads
            and self.sidewalks == other.sidewalks
            and self.pois == other.pois
        )

    __hash__ = object.__hash__


def validate_scene(scene: Scene) -> None:
    """Raise InvariantError naming the first violated scene invariant."""
    w, d = scene.extent
    if not (w > 0 and d > 0):
        raise InvariantError("extent-positive", f"extent {scene.extent}")
    if scene.resolution_m <= 0:
        raise InvariantError("resolution-positive", f"resolution {scene.resolution_m}")
    ny, nx = scene.heights.shape
    if nx < 1 or ny < 1:
        raise InvariantError("heightfield-shape", f"{scene.heights.shape}")
    ids = [p.id for p in scene.pois]
    if len(set(ids)) != len(ids):
        raise InvariantError("poi-ids-unique", f"{ids}")
    for poi in scene.pois:
        if not poi.name:
            raise InvariantError("poi-name-nonempty", poi.id)
        if poi.category not in POI_CATEGORIES:
            raise InvariantError("poi-category", f"{poi.id}: {poi.category!r}")
        if len(poi.entrances) < 1:
            raise InvariantError("poi-has-entrance", poi.id)
        sg = poi.signage
        if sg.width <= 0 or sg.height <= 0:
            raise InvariantError("signage-size", poi.id)
        if sg.center[2] <= 0:
            raise InvariantError("signage-mount-height", f"{poi.id}: z={sg.center[2]}")
        if abs(math.hypot(*sg.facing) - 1.0) > 1e-6:
            raise InvariantError("signage-facing-unit", poi.id)
        for ent in poi.entrances:
            if ent.flush_a == ent.flush_b:
                raise InvariantError("entrance-flush-distinct", poi.id)
            if ent.depth <= 0:
                raise InvariantError("entrance-depth-positive", poi.id)
            for cx, cy in ent.corners():
                if not (0.0 <= cx <= w and 0.0 <= cy <= d):
                    raise InvariantError("entrance-within-extent", f"{poi.id}: corner ({cx}, {cy})")
            gz = scene.ground(*ent.center())
            if abs(ent.elevation - gz) > GROUND_FLUSH_TOL:
                raise InvariantError(
                    "ground-flush", f"{poi.id}: elevation {ent.elevation} vs ground {gz:.4f}"
                )
    for i, ob in enumerate(scene.obstacles):
        if len(ob.footprint) < 3:
            raise InvariantError("obstacle-vertices", f"obstacle {i}")
        if not is_convex(ob.footprint):
            raise InvariantError("obstacle-convex", f"obstacle {i}")
        if abs(poly_area(ob.footprint)) < 1e-9:
            raise InvariantError("obstacle-degenerate", f"obstacle {i}")
        if ob.kind not in OBSTACLE_KINDS:
            raise InvariantError("obstacle-kind", f"obstacle {i}: {ob.kind!r}")


# -- canonical document -------------------------------------------------------


def _q2(p) -> list:
    return [q6(p[0]), q6(p[1])]


def _q3(p) -> list:
    return [q6(p[0]), q6(p[1]), q6(p[2])]


def scene_to_doc(scene: Scene) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "id": scene.id,
        "extent": {"width": q6(scene.extent[0]), "depth": q6(scene.extent[1])},
        "resolution_m": q6(scene.resolution_m),
        "heightfield": {
            "nx": int(scene.heights.shape[1]),
            "ny": int(scene.heights.shape[0]),
            "values": [q6(v) for v in scene.heights.ravel().tolist()],
        },
        "obstacles": [
            {"footprint": [_q2(v) for v in ob.footprint], "height": q6(ob.height), "kind": ob.kind}
            for ob in scene.obstacles
        ],
        "roads": [[_q2(v) for v in poly] for poly in scene.roads],
        "sidewalks": [[_q2(v) for v in poly] for poly in scene.sidewalks],
        "pois": [
            {
                "id": p.id,
                "name": p.name,
                "category": p.category,
                "signage": {
                    "center": _q3(p.signage.center),
                    "width": q6(p.signage.width),
                    "height": q6(p.signage.height),
                    "facing": _q3(p.signage.facing),
                    "text_glyph_id": int(p.signage.text_glyph_id),
                },
                "entrances": [
                    {
                        "flush_a": _q2(e.flush_a),
                        "flush_b": _q2(e.flush_b),
                        "depth": q6(e.depth),
                        "elevation": q6(e.elevation),
                    }
                    for e in p.entrances
                ],
            }
            for p in scene.pois
        ],
    }


def _need(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError(f"missing field {key!r} in {where}")
    return doc[key]


def scene_from_doc(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise ParseError("scene document must be a JSON object")
    version = _need(doc, "format_version", "scene")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version}")
    ext = _need(doc, "extent", "scene")
    hf = _need(doc, "heightfield", "scene")
    try:
        nx, ny = int(hf["nx"]), int(hf["ny"])
        values = np.asarray(hf["values"], dtype=np.float64)
        if values.size != nx * ny:
            raise ParseError(f"heightfield has {values.size} values, expected {nx * ny}")
        heights = values.reshape(ny, nx)
        obstacles = tuple(
            Obstacle(
                footprint=tuple((float(x), float(y)) for x, y in ob["footprint"]),
                height=float(ob["height"]),
                kind=str(ob["kind"]),
            )
            for ob in _need(doc, "obstacles", "scene")
        )
        pois = []
        for pd in _need(doc, "pois", "scene"):
            sg = pd["signage"]
            pois.append(
                POI(
                    id=str(pd["id"]),
                    name=str(pd["name"]),
                    category=str(pd["category"]),
                    signage=Signage(
                        center=tuple(float(v) for v in sg["center"]),
                        width=float(sg["width"]),
                        height=float(sg["height"]),
                        facing=tuple(float(v) for v in sg["facing"]),
                        text_glyph_id=int(sg["text_glyph_id"]),
                    ),
                    entrances=tuple(
                        EntranceRegion(
                            flush_a=(float(e["flush_a"][0]), float(e["flush_a"][1])),
                            flush_b=(float(e["flush_b"][0]), float(e["flush_b"][1])),
                            depth=float(e["depth"]),
                            elevation=float(e["elevation"]),
                        )
                        for e in pd["entrances"]
                    ),
                )
            )
        scene = Scene(
            id=str(_need(doc, "id", "scene")),
            extent=(float(ext["width"]), float(ext["depth"])),
            resolution_m=float(_need(doc, "resolution_m", "scene")),
            heights=heights,
            obstacles=obstacles,
            roads=tuple(tuple((float(x), float(y)) for x, y in poly) for poly in _need(doc, "roads", "scene")),
            sidewalks=tuple(
                tuple((float(x), float(y)) for x, y in poly) for poly in _need(doc, "sidewalks", "scene")
            ),
            pois=tuple(pois),
        )
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise ParseError(f"malformed scene document: {e}") from e
    validate_scene(scene)
    return scene


def save_scene(scene: Scene, path) -> None:
    write_canonical(path, scene_to_doc(scene), g6_floats=True)


def scene_dumps(scene: Scene) -> str:
    return canonical_dumps(scene_to_doc(scene), g6_floats=True)


def load_scene(path) -> Scene:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON at line {e.lineno} col {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ParseError(f"cannot read scene file: {e}") from e
    return scene_from_doc(doc)
