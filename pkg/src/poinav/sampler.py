"""Episode start sampling: annulus-constrained, traversable, goal-connected
poses with at least partial signage visibility.

Headings are uniform random, deliberately not goal-facing: large initial
angular offsets are part of the benchmark. Visibility is probed with the
camera turned toward the sign (the agent may rotate in place at episode
start), while the stored heading stays random.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExhaustedError
from .episode import Pose
from .jsonio import q6
from .navgrid import OccupancyGrid
from .planner import DEFAULT_GOAL_EPSILON, goal_cells
from .render import CameraModel, visibility
from .scene import POI, Scene


@dataclass(frozen=True)
class StartSpec:
    r_min: float = 10.0
    r_max: float = 30.0
    n_starts: int = 1
    require_visibility: bool = True
    max_attempts: int = 2000

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ValueError(f"need 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")


@dataclass(frozen=True)
class StartPose:
    position: tuple[float, float]
    heading: float
    visible_fraction: float

    def to_doc(self) -> dict:
        return {
            "position": [q6(self.position[0]), q6(self.position[1])],
            "heading": q6(self.heading),
            "visible_fraction": q6(self.visible_fraction),
        }

    @staticmethod
    def from_doc(doc: dict) -> "StartPose":
        return StartPose(
            position=(float(doc["position"][0]), float(doc["position"][1])),
            heading=float(doc["heading"]),
            visible_fraction=float(doc["visible_fraction"]),
        )


def _goal_labels(grid_inflated: OccupancyGrid, poi: POI) -> set[int]:
    labels = grid_inflated.free_components()
    found: set[int] = set()
    for ent in poi.entrances:
        for ix, iy in goal_cells(grid_inflated, ent, DEFAULT_GOAL_EPSILON):
            found.add(int(labels[iy, ix]))
    return found


def sample_starts(
    scene: Scene,
    grid: OccupancyGrid,
    poi: POI,
    spec: StartSpec,
    seed: int,
    camera: CameraModel | None = None,
) -> list[StartPose]:
    """Rejection-sample n_starts validated poses, deterministic in seed.

    Raises ExhaustedError carrying the rejection histogram
    (out-of-annulus / occupied / invisible / unreachable) after max_attempts.
    """
    camera = camera or CameraModel()
    inflated = grid.inflated()
    labels = inflated.free_components()
    goal_lbls = _goal_labels(inflated, poi)
    rng = np.random.default_rng(seed)
    rejections = {"out-of-annulus": 0, "occupied": 0, "invisible": 0, "unreachable": 0}
    out: list[StartPose] = []
    sx, sy, _ = poi.signage.center

    attempts = 0
    while len(out) < spec.n_starts:
        attempts += 1
        if attempts > spec.max_attempts:
            raise ExhaustedError(
                f"sampled {len(out)}/{spec.n_starts} starts in {spec.max_attempts} attempts",
                rejections,
            )
        ent = poi.entrances[int(rng.integers(len(poi.entrances)))]
        cx, cy = ent.center()
        r = math.sqrt(float(rng.uniform(spec.r_min**2, spec.r_max**2)))
        th = float(rng.uniform(-math.pi, math.pi))
        p = (q6(cx + r * math.cos(th)), q6(cy + r * math.sin(th)))

        d = poi.distance_to(p)
        if not (spec.r_min <= d <= spec.r_max):
            rejections["out-of-annulus"] += 1
            continue
        if not scene.contains_point(p) or not inflated.is_free_world(p):
            rejections["occupied"] += 1
            continue
        probe = Pose(p[0], p[1], math.atan2(sy - p[1], sx - p[0]))
        vf = visibility(scene, probe, camera, poi).signage_fraction
        if spec.require_visibility and vf <= 0.0:
            rejections["invisible"] += 1
            continue
        ix, iy = inflated.world_to_cell(p)
        if goal_lbls and int(labels[iy, ix]) not in goal_lbls:
            rejections["unreachable"] += 1
            continue
        if not goal_lbls:
            rejections["unreachable"] += 1
            continue
        heading = q6(float(rng.uniform(-math.pi, math.pi)))
        out.append(StartPose(position=p, heading=heading, visible_fraction=q6(vf)))
    return out


def derived_seed(global_seed: int, poi_id: str) -> int:
    from .jsonio import stable_hash

    return (global_seed ^ stable_hash(poi_id)) & 0x7FFFFFFFFFFFFFFF
