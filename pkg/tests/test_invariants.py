"""Cross-cutting record-level invariants checked on real benchmark output."""
import math

import pytest

from poinav.generator import GeneratorSpec, generate_scene
from poinav.harness import BenchmarkConfig, run_benchmark
from poinav.episode import MAX_STEP_M


@pytest.fixture(scope="module")
def runs():
    scene = generate_scene(9, GeneratorSpec(n_pois=3, street_length_m=40.0, sidewalk_width_m=4.0))
    world = {scene.id: scene}
    oracle = run_benchmark(world, BenchmarkConfig(policy="oracle", episodes_per_poi=1, seed=2))
    pursuit = run_benchmark(world, BenchmarkConfig(policy="cue_pursuit", episodes_per_poi=1, seed=2),
                            oracle.episodes)
    return oracle, pursuit


def test_trajectory_continuity(runs):
    for run in runs:
        for rec in run.records:
            for (x0, y0, _), (x1, y1, _) in zip(rec.trajectory, rec.trajectory[1:]):
                assert math.hypot(x1 - x0, y1 - y0) <= MAX_STEP_M + 1e-9


def test_trajectory_length_matches_steps(runs):
    for run in runs:
        for rec in run.records:
            assert len(rec.trajectory) == rec.steps + 1
            assert len(rec.obs_digests) == rec.steps + 1


def test_path_length_bounded_below_by_displacement(runs):
    for run in runs:
        for rec in run.records:
            x0, y0, _ = rec.trajectory[0]
            x1, y1, _ = rec.trajectory[-1]
            assert rec.path_length_m >= math.hypot(x1 - x0, y1 - y0) - 1e-9


def test_success_rederivable_from_record(runs):
    for run in runs:
        for rec in run.records:
            if rec.status == "success":
                assert rec.collisions == 0
                assert rec.final_distance_m <= 2.0 + 1e-9
                assert rec.actions[-1]["stop"] is True


def test_observation_boxes_within_raster(runs):
    from poinav.episode import Pose
    from poinav.render import CameraModel, render
    from poinav.generator import GeneratorSpec, generate_scene

    scene = generate_scene(9, GeneratorSpec(n_pois=3, street_length_m=40.0, sidewalk_width_m=4.0))
    cam = CameraModel()
    for pose in (Pose(10.0, 12.0, 0.4), Pose(30.0, 11.5, 2.8), Pose(20.0, 12.5, -1.2)):
        obs = render(scene, pose, cam)
        assert len(obs.depth) == cam.n_columns
        for b in obs.boxes:
            assert 0.0 <= b.box.x0 <= b.box.x1 <= cam.n_columns
            assert 0.0 <= b.box.y0 <= b.box.y1 <= cam.n_rows
            assert 0.0 < b.fraction <= 1.0
