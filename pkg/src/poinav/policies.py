"""Baseline policies for the closed loop.

oracle       privileged pure-pursuit along the planned reference path; upper
             bounds achievable success and path efficiency.
cue_pursuit  observation-only: grounds the instruction each frame, steers at
             the handed-over cue box, scans in place when nothing grounds.
random       uniform random waypoint steps.
latent       cue-conditioned featurizer + latent-query decode with a shipped
             (untrained) weight bundle; demonstrates the full pipeline.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .action import (
    DEFAULT_HORIZON,
    WeightBundle,
    build_context,
    default_bundle,
    encode_context,
    latent_query,
)
from .brain import BrainNoise, Cue, ground, select_cue
from .errors import NoCueError
from .episode import MAX_STEP_M, SuccessCriterion, distance_to_poi
from .navgrid import OccupancyGrid
from .planner import ReferencePath
from .render import CameraModel, Observation
from .scene import POI, Scene

SCAN_TURN_RAD = math.radians(35.0)
SCAN_STEP_M = 0.05


@dataclass
class EpisodeContext:
    scene: Scene
    poi: POI
    grid: OccupancyGrid
    camera: CameraModel
    criterion: SuccessCriterion
    seed: int
    path: ReferencePath | None = None
    noise: BrainNoise | None = None


@dataclass(frozen=True)
class PolicyDecision:
    waypoints: tuple[tuple[float, float], ...]
    stop: bool = False


class Policy:
    name = "base"
    privileged = False  # whether decide() receives the true pose

    def begin(self, ctx: EpisodeContext) -> None:
        self.ctx = ctx

    def decide(self, obs: Observation, pose=None) -> PolicyDecision:
        raise NotImplementedError


def _scan_decision() -> PolicyDecision:
    # Heading follows the executed displacement, so a short arc step turns the
    # agent by SCAN_TURN_RAD while barely moving.
    return PolicyDecision(
        waypoints=((SCAN_STEP_M * math.cos(SCAN_TURN_RAD), SCAN_STEP_M * math.sin(SCAN_TURN_RAD)),)
    )


class OraclePolicy(Policy):
    """Walks the reference polyline vertex to vertex (never cutting corners,
    so the planned clearance is preserved) and stops at the path end or as
    soon as the goal is within half the success threshold."""

    name = "oracle"
    privileged = True

    def begin(self, ctx: EpisodeContext) -> None:
        super().begin(ctx)
        if ctx.path is None:
            raise ValueError("oracle policy needs a reference path")
        self._next = 0

    def decide(self, obs: Observation, pose=None) -> PolicyDecision:
        ctx = self.ctx
        p = (pose.x, pose.y)
        if distance_to_poi(p, ctx.poi) <= ctx.criterion.epsilon / 2:
            return PolicyDecision(waypoints=(), stop=True)
        wps = ctx.path.waypoints
        while self._next < len(wps) and math.hypot(wps[self._next][0] - p[0], wps[self._next][1] - p[1]) < 1e-7:
            self._next += 1
        if self._next >= len(wps):
            return PolicyDecision(waypoints=(), stop=True)
        # Extend the target through collinear vertices so one step can cover
        # straight runs, while staying on the polyline.
        target = wps[self._next]
        j = self._next
        while j + 1 < len(wps):
            nxt = wps[j + 1]
            if math.hypot(nxt[0] - p[0], nxt[1] - p[1]) > MAX_STEP_M:
                break
            cross = (target[0] - p[0]) * (nxt[1] - p[1]) - (target[1] - p[1]) * (nxt[0] - p[0])
            dot = (target[0] - p[0]) * (nxt[0] - p[0]) + (target[1] - p[1]) * (nxt[1] - p[1])
            if abs(cross) > 1e-9 or dot <= 0:
                break
            j += 1
            target = nxt
        self._next = j
        dx, dy = target[0] - p[0], target[1] - p[1]
        dist = math.hypot(dx, dy)
        if dist > MAX_STEP_M:
            dx *= MAX_STEP_M / dist
            dy *= MAX_STEP_M / dist
        c, s = math.cos(pose.heading), math.sin(pose.heading)
        return PolicyDecision(waypoints=((c * dx + s * dy, -s * dx + c * dy),))


class CuePursuitPolicy(Policy):
    """Steers toward the cue box's bearing; declares arrival when the
    entrance cue is nearly fully visible and the depth under it is within the
    success threshold."""

    name = "cue_pursuit"

    def begin(self, ctx: EpisodeContext) -> None:
        super().begin(ctx)
        self._noise = (ctx.noise or BrainNoise()).reseeded(ctx.seed)

    def _cue(self, obs: Observation) -> Cue | None:
        try:
            g = ground(obs, self.ctx.poi.name, self.ctx.scene, self._noise, self.ctx.camera)
            return select_cue(g, obs)
        except NoCueError:
            return None

    def _arrived(self, obs: Observation, cue: Cue, depth_at_cue: float) -> bool:
        """Observation-only arrival test: the entrance cue is nearly fully in
        view with the depth under it inside the threshold, or the box's
        bottom edge back-projects to ground within half the threshold (covers
        oblique approaches where the cue-column ray exits through the gap)."""
        if cue.kind != "entrance":
            return False
        camera = self.ctx.camera
        box = obs.box_for(cue.source_poi, "entrance")
        fraction = box.fraction if box else 0.0
        if fraction >= 0.9 and depth_at_cue <= self.ctx.criterion.epsilon:
            return True
        elev = camera.vfov / 2 - cue.box.y1 * camera.vfov / camera.n_rows
        if elev < 0:
            ground_dist = camera.height / math.tan(-elev)
            if ground_dist <= self.ctx.criterion.epsilon / 2:
                return True
        return False

    def decide(self, obs: Observation, pose=None) -> PolicyDecision:
        cue = self._cue(obs)
        if cue is None:
            return _scan_decision()
        camera = self.ctx.camera
        col = min(max(cue.box.center()[0], 0.0), camera.n_columns - 1e-9)
        depth_at_cue = float(obs.depth[int(col)])
        if self._arrived(obs, cue, depth_at_cue):
            return PolicyDecision(waypoints=(), stop=True)
        rel = camera.hfov / 2 - col * camera.hfov / camera.n_columns  # agent-frame bearing
        step = MAX_STEP_M
        if math.isfinite(depth_at_cue):
            step = min(MAX_STEP_M, max(0.1, depth_at_cue - self.ctx.criterion.epsilon / 2))
        return PolicyDecision(waypoints=((step * math.cos(rel), step * math.sin(rel)),))


class RandomPolicy(Policy):
    name = "random"

    def begin(self, ctx: EpisodeContext) -> None:
        super().begin(ctx)
        self._rng = np.random.default_rng(ctx.seed)

    def decide(self, obs: Observation, pose=None) -> PolicyDecision:
        th = self._rng.uniform(-math.pi, math.pi)
        r = self._rng.uniform(0.0, MAX_STEP_M)
        return PolicyDecision(waypoints=((r * math.cos(th), r * math.sin(th)),))


class LatentPolicy(CuePursuitPolicy):
    """Runs the cue through the featurizer and the latent-query decoder. The
    shipped bundle is untrained; this policy exists to exercise the pipeline
    end to end, not to win the benchmark."""

    name = "latent"

    def __init__(self, bundle: WeightBundle | None = None, context_budget: int = DEFAULT_HORIZON):
        self.bundle = bundle or default_bundle()
        self.context_budget = context_budget

    def begin(self, ctx: EpisodeContext) -> None:
        super().begin(ctx)
        self._history: list[Observation] = []

    def decide(self, obs: Observation, pose=None) -> PolicyDecision:
        self._history.append(obs)
        cue = self._cue(obs)
        if cue is None:
            return _scan_decision()
        camera = self.ctx.camera
        col = min(max(cue.box.center()[0], 0.0), camera.n_columns - 1e-9)
        depth_at_cue = float(obs.depth[int(col)])
        if self._arrived(obs, cue, depth_at_cue):
            return PolicyDecision(waypoints=(), stop=True)
        tokens = encode_context(build_context(self._history, self.context_budget), cue, camera.max_range)
        plan = latent_query(tokens, self.bundle)
        return PolicyDecision(waypoints=plan.waypoints)


def make_policy(kind: str, bundle_path=None) -> Policy:
    if kind == "oracle":
        return OraclePolicy()
    if kind == "cue_pursuit":
        return CuePursuitPolicy()
    if kind == "random":
        return RandomPolicy()
    if kind == "latent":
        from .action import load_bundle

        return LatentPolicy(bundle=load_bundle(bundle_path) if bundle_path else None)
    raise ValueError(f"unknown policy kind {kind!r}")
