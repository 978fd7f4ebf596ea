import math

import numpy as np
import pytest

from poinav.generator import GeneratorSpec, generate_scene
from poinav.navgrid import segment_traversable
from poinav.scene import POI, EntranceRegion, Obstacle, Scene, Signage, validate_scene

RES = 0.1


def make_flat_scene(width=40.0, depth=10.0, obstacles=(), pois=(), scene_id="flat", heights=None):
    """All-sidewalk flat scene; the workhorse fixture for analytic tests."""
    nx = int(round(width / RES))
    ny = int(round(depth / RES))
    h = np.zeros((ny, nx)) if heights is None else heights
    scene = Scene(
        id=scene_id,
        extent=(width, depth),
        resolution_m=RES,
        heights=h,
        obstacles=tuple(obstacles),
        roads=(),
        sidewalks=(((0.0, 0.0), (width, 0.0), (width, depth), (0.0, depth)),),
        pois=tuple(pois),
    )
    validate_scene(scene)
    return scene


def box(x0, y0, x1, y1, height=3.5, kind="wall"):
    return Obstacle(footprint=((x0, y0), (x1, y0), (x1, y1), (x0, y1)), height=height, kind=kind)


def make_door_poi(facade_x, door_y0, door_y1, poi_id="poi-00", name="Corner Grocery",
                  sign_height=0.05, sign_z=3.0, sign_width=1.2):
    """Storefront on a facade plane at x=facade_x facing -x; entrance region
    extrudes one meter into the corridor."""
    yc = 0.5 * (door_y0 + door_y1)
    return POI(
        id=poi_id,
        name=name,
        category="Retail",
        signage=Signage(
            center=(facade_x - 0.01, yc, sign_z),
            width=sign_width,
            height=sign_height,
            facing=(-1.0, 0.0, 0.0),
            text_glyph_id=7,
        ),
        entrances=(
            EntranceRegion(flush_a=(facade_x, door_y0), flush_b=(facade_x, door_y1), depth=1.0, elevation=0.0),
        ),
    )


def make_corridor_scene(low_wall_x=None, door=(4.1, 5.9), facade_x=36.0, width=40.0, depth=10.0,
                        sign_height=0.05, sign_width=1.2, glass_door=True, scene_id="corridor"):
    """Straight approach corridor: facade with one doorway and a high thin
    sign; optionally a low wall across the corridor that hides the doorway
    (but not the sign) from behind it."""
    d0, d1 = door
    obstacles = [
        box(facade_x, 0.0, facade_x + 0.2, d0),
        box(facade_x, d1, facade_x + 0.2, depth),
    ]
    if glass_door:
        obstacles.append(box(facade_x + 0.05, d0, facade_x + 0.15, d1, height=2.2, kind="glass"))
    if low_wall_x is not None:
        obstacles.append(box(low_wall_x, 0.0, low_wall_x + 0.2, depth, height=0.6, kind="planter"))
    poi = make_door_poi(facade_x, d0, d1, sign_height=sign_height, sign_width=sign_width)
    return make_flat_scene(width, depth, obstacles, (poi,), scene_id=scene_id)


def make_two_poi_scene(scene_id="two-poi"):
    """Two storefronts side by side on one facade, both visible from the
    corridor axis; used by wrong-POI noise and judge tests."""
    facade = 36.0
    obstacles = [
        box(facade, 0.0, facade + 0.2, 2.0),
        box(facade, 3.6, facade + 0.2, 6.4),
        box(facade, 8.0, facade + 0.2, 10.0),
        box(facade + 0.05, 2.0, facade + 0.15, 3.6, height=2.2, kind="glass"),
        box(facade + 0.05, 6.4, facade + 0.15, 8.0, height=2.2, kind="glass"),
    ]
    poi_a = make_door_poi(facade, 2.0, 3.6, poi_id="poi-a", name="Unity Bank", sign_height=0.4)
    poi_b = make_door_poi(facade, 6.4, 8.0, poi_id="poi-b", name="Golden Wok", sign_height=0.4)
    return make_flat_scene(40.0, 10.0, obstacles, (poi_a, poi_b), scene_id=scene_id)


@pytest.fixture(scope="session")
def gen_scene():
    return generate_scene(7, GeneratorSpec(n_pois=8, street_length_m=90.0, sidewalk_width_m=4.0))


@pytest.fixture(scope="session")
def gen_grid(gen_scene):
    return segment_traversable(gen_scene)


@pytest.fixture()
def corridor_scene():
    return make_corridor_scene()


@pytest.fixture()
def two_poi_scene():
    return make_two_poi_scene()
