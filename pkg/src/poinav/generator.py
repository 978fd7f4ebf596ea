"""Seeded procedural generator of synthetic commercial-street scenes.

Layout (south to north): sidewalk, road, sidewalk, storefront strip. Shops
share party walls, every doorway gets a recessed glass door panel, signs are
mounted high on the facade. All coordinates are snapped so the scene document
round-trips byte-identically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .jsonio import q6
from .scene import (
    HEIGHTFIELD_RESOLUTION,
    POI,
    POI_CATEGORIES,
    EntranceRegion,
    Obstacle,
    Scene,
    Signage,
    validate_scene,
)

AGENT_RADIUS = 0.3

ROAD_WIDTH = 6.0
SHOP_DEPTH = 8.0
WALL_THICKNESS = 0.2
WALL_HEIGHT = 3.5
DOOR_HEIGHT = 2.2
SIGN_MOUNT_HEIGHT = 3.0
SIGN_HEIGHT = 0.8
MIN_FRONTAGE = 6.0

_NAMES = {
    "Dining": ("Golden Wok", "Noodle House 88", "Cafe Aurora", "Daxiao Hotpot", "Sunrise Bakery", "Pepper & Salt Grill"),
    "Retail": ("Northside Books", "Lumen Electronics", "Maple Outfitters", "Corner Grocery", "Atlas Shoes", "Petal & Stem Florist"),
    "Medical&Health": ("Evergreen Pharmacy", "Bright Smile Dental", "Harbor Clinic", "Wellspring Optics"),
    "Service": ("Star Express Couriers", "Unity Bank", "Quick Cut Barbers", "Crystal Laundry", "Summit Travel"),
    "Entertainment": ("Orbit Arcade", "Blue Door Cinema", "Melody Karaoke", "Pavilion Billiards"),
}


@dataclass(frozen=True)
class GeneratorSpec:
    n_pois: int
    street_length_m: float
    sidewalk_width_m: float


def _snap(x: float, step: float = 0.05) -> float:
    return q6(round(x / step) * step)


def generate_scene(seed: int, spec: GeneratorSpec) -> Scene:
    """Deterministic in (seed, spec): same inputs give an identical scene."""
    if spec.n_pois < 1:
        raise SpecError("n_pois must be >= 1")
    if spec.sidewalk_width_m < 2 * AGENT_RADIUS:
        raise SpecError(f"sidewalk width {spec.sidewalk_width_m} < {2 * AGENT_RADIUS}")
    length = q6(spec.street_length_m)
    sw = q6(spec.sidewalk_width_m)
    if spec.n_pois * MIN_FRONTAGE > length:
        raise SpecError(
            f"{spec.n_pois} POIs x {MIN_FRONTAGE} m minimum frontage exceeds {length} m street"
        )

    rng = np.random.default_rng(seed)
    y_facade = q6(2 * sw + ROAD_WIDTH)
    depth = q6(y_facade + SHOP_DEPTH)

    res = HEIGHTFIELD_RESOLUTION
    nx = int(round(length / res))
    ny = int(round(depth / res))
    heights = np.zeros((ny, nx), dtype=np.float64)

    # Partition the street front into shop frontages (minimum + weighted rest).
    weights = rng.random(spec.n_pois) + 0.5
    extra = (length - spec.n_pois * MIN_FRONTAGE) * weights / weights.sum()
    bounds = [0.0]
    for i in range(spec.n_pois):
        bounds.append(bounds[-1] + MIN_FRONTAGE + float(extra[i]))
    bounds = [_snap(b) for b in bounds]
    bounds[-1] = length

    obstacles: list[Obstacle] = []
    pois: list[POI] = []

    def wall(x0, y0, x1, y1, kind="wall", height=WALL_HEIGHT):
        obstacles.append(
            Obstacle(
                footprint=((q6(x0), q6(y0)), (q6(x1), q6(y0)), (q6(x1), q6(y1)), (q6(x0), q6(y1))),
                height=q6(height),
                kind=kind,
            )
        )

    # Back wall shared by all shops.
    wall(0.0, depth - WALL_THICKNESS, length, depth)

    categories = [POI_CATEGORIES[int(rng.integers(len(POI_CATEGORIES)))] for _ in range(spec.n_pois)]
    used_names: set[str] = set()
    door_spans: list[tuple[float, float]] = []

    for i in range(spec.n_pois):
        x0, x1 = bounds[i], bounds[i + 1]
        frontage = x1 - x0
        glass_front = rng.random() < 0.3

        two_doors = frontage >= 9.0 and rng.random() < 0.35
        door_w = _snap(float(rng.uniform(1.2, 2.0)), 0.1)
        if two_doors:
            centers = [x0 + 0.28 * frontage, x0 + 0.72 * frontage]
        else:
            centers = [x0 + frontage * float(rng.uniform(0.38, 0.62))]
        doors = []
        for c in centers:
            d0 = _snap(max(x0 + 1.0, c - door_w / 2))
            d1 = _snap(min(x1 - 1.0, d0 + door_w))
            doors.append((d0, d1))
        doors.sort()

        # Facade segments between doorway gaps.
        cursor = x0
        front_kind = "glass" if glass_front else "wall"
        for d0, d1 in doors:
            if d0 - cursor > 0.01:
                wall(cursor, y_facade, d0, y_facade + WALL_THICKNESS, kind=front_kind)
            cursor = d1
        if x1 - cursor > 0.01:
            wall(cursor, y_facade, x1, y_facade + WALL_THICKNESS, kind=front_kind)

        # Party wall on the left edge (plus right edge for the last shop).
        wall(max(0.0, x0 - WALL_THICKNESS / 2), y_facade, min(length, x0 + WALL_THICKNESS / 2), depth)
        if i == spec.n_pois - 1:
            wall(max(0.0, x1 - WALL_THICKNESS / 2), y_facade, x1, depth)

        entrances = []
        for d0, d1 in doors:
            # Recessed glass door panel: blocks motion and rays, sits behind
            # the flush line so the entrance region stays unoccluded.
            wall(d0, y_facade + 0.05, d1, y_facade + 0.15, kind="glass", height=DOOR_HEIGHT)
            entrances.append(
                EntranceRegion(
                    flush_a=(q6(d1), y_facade),
                    flush_b=(q6(d0), y_facade),
                    depth=1.0,
                    elevation=0.0,
                )
            )
            door_spans.append((d0, d1))

        cat = categories[i]
        pool = _NAMES[cat]
        name = pool[int(rng.integers(len(pool)))]
        if name in used_names:
            name = f"{name} No.{i + 1}"
        used_names.add(name)

        sign_w = _snap(min(frontage * 0.7, 4.0))
        sign_x = _snap((x0 + x1) / 2)
        pois.append(
            POI(
                id=f"poi-{i:02d}",
                name=name,
                category=cat,
                signage=Signage(
                    center=(sign_x, q6(y_facade - 0.01), SIGN_MOUNT_HEIGHT),
                    width=sign_w,
                    height=SIGN_HEIGHT,
                    facing=(0.0, -1.0, 0.0),
                    text_glyph_id=i + 1,
                ),
                entrances=tuple(entrances),
            )
        )

    # Street furniture only fits on sidewalks wide enough to walk around it.
    if sw >= 2.0:
        # Lamp poles along the curb side of the north sidewalk, clear of doorways.
        x = 5.0
        while x < length - 2.0:
            px = _snap(x + float(rng.uniform(-1.0, 1.0)))
            if all(px < d0 - 2.0 or px > d1 + 2.0 for d0, d1 in door_spans):
                y0 = q6(sw + ROAD_WIDTH + 0.4)
                wall(px - 0.125, y0, px + 0.125, y0 + 0.25, kind="pole", height=4.0)
            x += float(rng.uniform(9.0, 13.0))

        # Planters on the far (south) sidewalk.
        x = 8.0
        while x < length - 3.0:
            px = _snap(x)
            wall(px, q6(sw * 0.25), px + 1.2, q6(sw * 0.25 + 0.5), kind="planter", height=0.7)
            x += float(rng.uniform(14.0, 22.0))

    south_walk = ((0.0, 0.0), (length, 0.0), (length, sw), (0.0, sw))
    road = ((0.0, sw), (length, sw), (length, q6(sw + ROAD_WIDTH)), (0.0, q6(sw + ROAD_WIDTH)))
    north_walk = ((0.0, q6(sw + ROAD_WIDTH)), (length, q6(sw + ROAD_WIDTH)), (length, y_facade), (0.0, y_facade))

    scene = Scene(
        id=f"street-{seed & 0xFFFFFFFFFFFFFFFF:016x}",
        extent=(length, depth),
        resolution_m=res,
        heights=heights,
        obstacles=tuple(obstacles),
        roads=(road,),
        sidewalks=(south_walk, north_walk),
        pois=tuple(pois),
    )
    validate_scene(scene)
    return scene
