import pytest

from conftest import make_two_poi_scene
from poinav.brain import BrainNoise, ground
from poinav.episode import Pose
from poinav.judge import JudgeThresholds, aggregate_verdicts, judge
from poinav.render import CameraModel, RasterBox, render


@pytest.fixture(scope="module")
def setup():
    scene = make_two_poi_scene()
    pose = Pose(28.0, 5.0, 0.0)
    obs = render(scene, pose)
    return scene, pose, obs


def test_identity_prediction_passes(setup):
    scene, pose, obs = setup
    pred = obs.box_for("poi-a", "entrance").box
    v = judge(pred, scene.poi_by_id("poi-a"), scene, pose)
    assert v.rc and v.gq and not v.ambiguous


def test_disjoint_prediction_fails_rc(setup):
    scene, pose, obs = setup
    pred = RasterBox(5.0, 40.0, 20.0, 55.0)  # ground far off to the left
    v = judge(pred, scene.poi_by_id("poi-a"), scene, pose)
    assert not v.rc and not v.gq


def test_wrong_poi_prediction_fails_rc(setup):
    scene, pose, obs = setup
    pred = obs.box_for("poi-b", "entrance").box
    v = judge(pred, scene.poi_by_id("poi-a"), scene, pose)
    assert not v.rc


def test_spanning_both_entrances_is_ambiguous(setup):
    scene, pose, obs = setup
    a = obs.box_for("poi-a", "entrance").box
    b = obs.box_for("poi-b", "entrance").box
    pred = RasterBox(min(a.x0, b.x0), min(a.y0, b.y0), max(a.x1, b.x1), max(a.y1, b.y1))
    v = judge(pred, scene.poi_by_id("poi-a"), scene, pose)
    assert v.rc
    assert v.ambiguous
    assert not v.gq


def test_enlarging_to_cover_neighbor_never_clears_ambiguity(setup):
    # from the queried entrance alone to a box also covering the neighbor's:
    # ambiguity can only appear, never vanish (and modest further growth
    # keeps it)
    scene, pose, obs = setup
    a = obs.box_for("poi-a", "entrance").box
    b = obs.box_for("poi-b", "entrance").box
    own = judge(a, scene.poi_by_id("poi-a"), scene, pose)
    base = RasterBox(min(a.x0, b.x0), min(a.y0, b.y0), max(a.x1, b.x1), max(a.y1, b.y1))
    v0 = judge(base, scene.poi_by_id("poi-a"), scene, pose)
    grown = RasterBox(max(0, base.x0 - 6), base.y0, min(256, base.x1 + 6), base.y1)
    v1 = judge(grown, scene.poi_by_id("poi-a"), scene, pose)
    assert not own.ambiguous
    assert v0.ambiguous and v1.ambiguous


def test_world_space_prediction(setup):
    scene, pose, obs = setup
    poi = scene.poi_by_id("poi-a")
    v = judge(poi.entrances[0], poi, scene, pose)
    assert v.rc and v.gq


def test_grounded_zero_noise_judged_perfect(setup):
    scene, pose, obs = setup
    for name, pid in (("Unity Bank", "poi-a"), ("Golden Wok", "poi-b")):
        g = ground(obs, name, scene, BrainNoise())
        v = judge(g.entrance_box, scene.poi_by_id(pid), scene, pose)
        assert v.rc and v.gq and not v.ambiguous


def test_aggregate_format():
    scene, pose, obs = make_two_poi_scene(), Pose(28.0, 5.0, 0.0), None
    obs = render(scene, pose)
    verdicts = []
    for name, pid in (("Unity Bank", "poi-a"), ("Golden Wok", "poi-b")):
        g = ground(obs, name, scene, BrainNoise())
        verdicts.append(judge(g.entrance_box, scene.poi_by_id(pid), scene, pose))
    agg = aggregate_verdicts(verdicts)
    assert agg["n"] == 2
    assert agg["rc_pct"] == 100.0
    assert agg["gq_pct"] == 100.0
    assert agg["referential_error_pct"] == 0.0


def test_any_entrance_of_multi_entrance_poi_is_valid():
    # one POI with two doorways: grounding either door must count as correct
    from conftest import box, make_flat_scene
    from poinav.scene import POI, EntranceRegion, Signage

    facade = 36.0
    obstacles = (
        box(facade, 0.0, facade + 0.2, 2.0),
        box(facade, 3.6, facade + 0.2, 6.4),
        box(facade, 8.0, facade + 0.2, 10.0),
    )
    poi = POI(
        id="poi-multi",
        name="Harbor Clinic",
        category="Medical&Health",
        signage=Signage(center=(facade - 0.01, 5.0, 3.0), width=2.0, height=0.4,
                        facing=(-1.0, 0.0, 0.0), text_glyph_id=1),
        entrances=(
            EntranceRegion(flush_a=(facade, 2.0), flush_b=(facade, 3.6), depth=1.0, elevation=0.0),
            EntranceRegion(flush_a=(facade, 6.4), flush_b=(facade, 8.0), depth=1.0, elevation=0.0),
        ),
    )
    scene = make_flat_scene(40.0, 10.0, obstacles, (poi,), scene_id="multi")
    pose = Pose(28.0, 5.0, 0.0)
    for ent in poi.entrances:
        v = judge(ent, poi, scene, pose)
        assert v.rc and not v.ambiguous


def test_thresholds_are_pinned():
    th = JudgeThresholds()
    assert th.iou_rc == 0.1
    assert th.cover_min == 0.3
    assert th.iou_other == 0.05
