import pytest

from poinav.errors import SpecError
from poinav.generator import GeneratorSpec, generate_scene
from poinav.geometry import convex_overlap_area
from poinav.navgrid import FREE, segment_traversable
from poinav.planner import goal_cells
from poinav.scene import scene_dumps, validate_scene


def test_minimal_single_poi():
    scene = generate_scene(1, GeneratorSpec(n_pois=1, street_length_m=20.0, sidewalk_width_m=4.0))
    validate_scene(scene)
    assert len(scene.pois) == 1
    assert 1 <= len(scene.pois[0].entrances) <= 2


def test_same_seed_identical_bytes():
    spec = GeneratorSpec(n_pois=6, street_length_m=60.0, sidewalk_width_m=3.5)
    assert scene_dumps(generate_scene(11, spec)) == scene_dumps(generate_scene(11, spec))


def test_different_seed_differs():
    spec = GeneratorSpec(n_pois=6, street_length_m=60.0, sidewalk_width_m=3.5)
    assert scene_dumps(generate_scene(1, spec)) != scene_dumps(generate_scene(2, spec))


def test_twelve_pois_no_entrance_overlap():
    scene = generate_scene(7, GeneratorSpec(n_pois=12, street_length_m=120.0, sidewalk_width_m=4.0))
    assert len(scene.pois) == 12
    regions = [e.corners() for p in scene.pois for e in p.entrances]
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            assert convex_overlap_area(regions[i], regions[j]) < 1e-9


def test_entrances_clear_of_obstacles(gen_scene):
    for poi in gen_scene.pois:
        for ent in poi.entrances:
            corners = ent.corners()
            for ob in gen_scene.obstacles:
                assert convex_overlap_area(corners, ob.footprint) < 1e-9, (poi.id, ob.kind)


def test_entrance_reachable_from_sidewalk(gen_scene, gen_grid):
    # at least one free cell within half a meter of each flush segment
    for poi in gen_scene.pois:
        for ent in poi.entrances:
            cells = goal_cells(gen_grid, ent, 0.5)
            assert cells, poi.id
            assert all(gen_grid.cells[iy, ix] == FREE for ix, iy in cells)


def test_geometry_must_fit():
    with pytest.raises(SpecError):
        generate_scene(1, GeneratorSpec(n_pois=10, street_length_m=30.0, sidewalk_width_m=4.0))
    with pytest.raises(SpecError):
        generate_scene(1, GeneratorSpec(n_pois=0, street_length_m=30.0, sidewalk_width_m=4.0))
    with pytest.raises(SpecError):
        generate_scene(1, GeneratorSpec(n_pois=1, street_length_m=30.0, sidewalk_width_m=0.5))


def test_every_poi_has_signage_and_glass_door(gen_scene):
    glass = [ob for ob in gen_scene.obstacles if ob.kind == "glass"]
    assert len(glass) >= len(gen_scene.pois)  # every doorway carries a glass panel
    for poi in gen_scene.pois:
        assert poi.signage.center[2] > 2.0
        assert poi.category in ("Dining", "Retail", "Medical&Health", "Service", "Entertainment")


def test_narrow_sidewalk_keeps_furniture_off():
    scene = generate_scene(4, GeneratorSpec(n_pois=2, street_length_m=30.0, sidewalk_width_m=0.8))
    validate_scene(scene)
    kinds = {ob.kind for ob in scene.obstacles}
    assert "pole" not in kinds and "planter" not in kinds
    from poinav.geometry import convex_overlap_area

    for poi in scene.pois:
        for ent in poi.entrances:
            for ob in scene.obstacles:
                assert convex_overlap_area(ent.corners(), ob.footprint) < 1e-9
