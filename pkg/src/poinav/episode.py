"""Closed-loop episode engine: pose state, swept-disc transition dynamics,
termination, and the arrival predicate.

The simulator is receding-horizon: an action may carry several waypoint
increments but only the first is executed; the policy is expected to replan
from the next observation. Arrival is never granted implicitly: the policy
must call stop(), and success additionally requires a collision-free
trajectory.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ActionError, EpisodeOverError, InvariantError
from .jsonio import q6
from .navgrid import FREE, OccupancyGrid, segment_traversable
from .render import CameraModel, Observation, render
from .scene import EntranceRegion, POI, Scene

MAX_STEP_M = 0.5
AGENT_RADIUS = 0.3
SWEEP_STEP_M = 0.001  # collision sub-sampling along the motion segment

RUNNING = "running"
SUCCESS = "success"
FAILURE = "failure"

REASON_COLLISION = "collision"
REASON_TIMEOUT = "timeout"
REASON_NOT_AT_GOAL = "not_at_goal"

TERMINATE = "terminate"
COUNT_AND_CONTINUE = "count_and_continue"


@dataclass
class Pose:
    x: float
    y: float
    heading: float  # radians in [-pi, pi)

    def __post_init__(self):
        self.heading = _wrap(self.heading)

    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    def copy(self) -> "Pose":
        return Pose(self.x, self.y, self.heading)


def _wrap(a: float) -> float:
    a = math.fmod(a + math.pi, 2 * math.pi)
    if a < 0:
        a += 2 * math.pi
    return a - math.pi


@dataclass(frozen=True)
class Action:
    waypoints: tuple[tuple[float, float], ...]  # agent-frame increments, meters

    def validate(self, max_step: float = MAX_STEP_M) -> None:
        if not self.waypoints:
            raise ActionError("action carries no waypoints")
        for dx, dy in self.waypoints:
            if math.hypot(dx, dy) > max_step + 1e-9:
                raise ActionError(f"waypoint ({dx}, {dy}) exceeds max step {max_step}")


@dataclass(frozen=True)
class SuccessCriterion:
    epsilon: float = 2.0
    collision_policy: str = TERMINATE
    max_steps: int = 500

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.collision_policy not in (TERMINATE, COUNT_AND_CONTINUE):
            raise ValueError(f"unknown collision policy {self.collision_policy!r}")

    def to_doc(self) -> dict:
        return {
            "epsilon": q6(self.epsilon),
            "collision_policy": self.collision_policy,
            "max_steps": self.max_steps,
        }

    @staticmethod
    def from_doc(doc: dict) -> "SuccessCriterion":
        return SuccessCriterion(
            epsilon=float(doc["epsilon"]),
            collision_policy=str(doc["collision_policy"]),
            max_steps=int(doc["max_steps"]),
        )


def distance_to_entrance(p: tuple[float, float], region: EntranceRegion) -> float:
    """0 inside the horizontal region, else distance to its boundary."""
    return region.distance_to(p)


def distance_to_poi(p: tuple[float, float], poi: POI) -> float:
    return min(distance_to_entrance(p, e) for e in poi.entrances)


# -- collision sweep -----------------------------------------------------------


def disc_hits_grid(grid: OccupancyGrid, centers: np.ndarray, radius: float) -> np.ndarray:
    """True per center where a disc of `radius` overlaps any non-free cell
    square (cells outside the map count as blocked)."""
    res = grid.resolution
    ox, oy = grid.origin
    ny, nx = grid.cells.shape
    cx = np.floor((centers[:, 0] - ox) / res).astype(np.int64)
    cy = np.floor((centers[:, 1] - oy) / res).astype(np.int64)
    span = int(math.ceil(radius / res)) + 1
    hit = np.zeros(len(centers), dtype=bool)
    r2 = radius * radius
    for dx in range(-span, span + 1):
        for dy in range(-span, span + 1):
            jx = cx + dx
            jy = cy + dy
            x0 = ox + jx * res
            y0 = oy + jy * res
            qx = np.clip(centers[:, 0], x0, x0 + res)
            qy = np.clip(centers[:, 1], y0, y0 + res)
            d2 = (centers[:, 0] - qx) ** 2 + (centers[:, 1] - qy) ** 2
            near = d2 < r2 - 1e-12
            if not near.any():
                continue
            inside = (jx >= 0) & (jx < nx) & (jy >= 0) & (jy < ny)
            blocked = ~inside.copy()
            ji = np.flatnonzero(inside)
            if len(ji):
                blocked[ji] = grid.cells[jy[ji], jx[ji]] != FREE
            hit |= near & blocked
    return hit


def sweep_motion(
    grid: OccupancyGrid, start: tuple[float, float], delta: tuple[float, float], radius: float = AGENT_RADIUS
) -> tuple[float, bool]:
    """March the agent disc along start -> start+delta at millimeter steps.

    Returns (executed fraction in [0, 1], collided). On collision the fraction
    points at the last collision-free sub-sample.
    """
    length = math.hypot(*delta)
    if length < 1e-12:
        return 1.0, False
    n = max(1, int(math.ceil(length / SWEEP_STEP_M)))
    ts = np.arange(1, n + 1) / n
    centers = np.stack([start[0] + ts * delta[0], start[1] + ts * delta[1]], axis=1)
    hits = disc_hits_grid(grid, centers, radius)
    if not hits.any():
        return 1.0, False
    first = int(np.argmax(hits))
    return (float(ts[first - 1]) if first > 0 else 0.0), True


# -- episode state --------------------------------------------------------------


@dataclass
class EpisodeState:
    scene: Scene
    poi: POI
    grid: OccupancyGrid
    camera: CameraModel
    criterion: SuccessCriterion
    start_doc: dict
    pose: Pose
    t: int = 0
    history: list = field(default_factory=list)
    trajectory: list = field(default_factory=list)
    collisions: int = 0
    status: str = RUNNING
    reason: str | None = None
    action_log: list = field(default_factory=list)
    obs_digests: list = field(default_factory=list)
    final_distance_m: float | None = None

    def distance_to_goal(self) -> float:
        return distance_to_poi((self.pose.x, self.pose.y), self.poi)

    def _finish(self, status: str, reason: str | None) -> None:
        self.status = status
        self.reason = reason
        self.final_distance_m = self.distance_to_goal()


def default_grid(scene: Scene) -> OccupancyGrid:
    grid = getattr(scene, "_default_grid", None)
    if grid is None:
        grid = segment_traversable(scene)
        object.__setattr__(scene, "_default_grid", grid)
    return grid


def reset(
    scene: Scene,
    poi: POI,
    start,
    criterion: SuccessCriterion | None = None,
    camera: CameraModel | None = None,
    grid: OccupancyGrid | None = None,
) -> tuple[EpisodeState, Observation]:
    """Start an episode at a sampled pose; emits the t=0 observation."""
    criterion = criterion or SuccessCriterion()
    camera = camera or CameraModel()
    grid = grid if grid is not None else default_grid(scene)
    px, py = start.position
    if not scene.contains_point((px, py)):
        raise InvariantError("start-within-extent", f"({px}, {py})")
    if not grid.inflated().is_free_world((px, py)):
        raise InvariantError("start-free-cell", f"({px}, {py})")
    pose = Pose(px, py, start.heading)
    state = EpisodeState(
        scene=scene,
        poi=poi,
        grid=grid,
        camera=camera,
        criterion=criterion,
        start_doc=start.to_doc(),
        pose=pose,
        trajectory=[pose.copy()],
    )
    obs = render(scene, pose, camera, t=0)
    state.history.append(obs)
    state.obs_digests.append(obs.digest())
    return state, obs


def step(state: EpisodeState, action: Action) -> tuple[EpisodeState, Observation]:
    """Execute the first waypoint of the action under swept collision checking."""
    if state.status != RUNNING:
        raise EpisodeOverError(f"episode already {state.status}")
    action.validate()
    dxa, dya = action.waypoints[0]
    c, s = math.cos(state.pose.heading), math.sin(state.pose.heading)
    world = (c * dxa - s * dya, s * dxa + c * dya)
    frac, collided = sweep_motion(state.grid, (state.pose.x, state.pose.y), world)
    executed = (world[0] * frac, world[1] * frac)
    state.pose.x += executed[0]
    state.pose.y += executed[1]
    if math.hypot(*executed) > 1e-3:
        state.pose.heading = _wrap(math.atan2(executed[1], executed[0]))
    state.t += 1
    state.trajectory.append(state.pose.copy())
    state.action_log.append(
        {"waypoints": [[float(dx), float(dy)] for dx, dy in action.waypoints], "stop": False}
    )
    if collided:
        state.collisions += 1
        if state.criterion.collision_policy == TERMINATE:
            state._finish(FAILURE, REASON_COLLISION)
    if state.status == RUNNING and state.t >= state.criterion.max_steps:
        state._finish(FAILURE, REASON_TIMEOUT)
    obs = render(state.scene, state.pose, state.camera, t=state.t)
    state.history.append(obs)
    state.obs_digests.append(obs.digest())
    return state, obs


def stop(state: EpisodeState) -> EpisodeState:
    """Declare arrival: success iff within epsilon (inclusive) of an entrance
    region of the target POI and the trajectory was collision-free. A 1 nm
    guard absorbs float noise at the exact boundary."""
    if state.status != RUNNING:
        raise EpisodeOverError(f"episode already {state.status}")
    state.action_log.append({"waypoints": [], "stop": True})
    d = state.distance_to_goal()
    state.final_distance_m = d
    if d <= state.criterion.epsilon + 1e-9 and state.collisions == 0:
        state.status = SUCCESS
        state.reason = None
    else:
        state.status = FAILURE
        state.reason = REASON_COLLISION if state.collisions > 0 else REASON_NOT_AT_GOAL
    return state


# -- persisted record ------------------------------------------------------------


@dataclass(frozen=True)
class EpisodeRecord:
    scene_id: str
    poi_id: str
    start: dict
    actions: tuple
    trajectory: tuple
    collisions: int
    status: str
    reason: str | None
    steps: int
    final_distance_m: float
    path_length_m: float
    obs_digests: tuple

    def to_doc(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "poi_id": self.poi_id,
            "start": self.start,
            "actions": [dict(a) for a in self.actions],
            "trajectory": [[float(x), float(y), float(h)] for x, y, h in self.trajectory],
            "collisions": self.collisions,
            "status": self.status,
            "reason": self.reason,
            "steps": self.steps,
            "final_distance_m": float(self.final_distance_m),
            "path_length_m": float(self.path_length_m),
            "obs_digests": list(self.obs_digests),
        }

    @staticmethod
    def from_doc(doc: dict) -> "EpisodeRecord":
        return EpisodeRecord(
            scene_id=str(doc["scene_id"]),
            poi_id=str(doc["poi_id"]),
            start=dict(doc["start"]),
            actions=tuple(dict(a) for a in doc["actions"]),
            trajectory=tuple((float(x), float(y), float(h)) for x, y, h in doc["trajectory"]),
            collisions=int(doc["collisions"]),
            status=str(doc["status"]),
            reason=None if doc["reason"] is None else str(doc["reason"]),
            steps=int(doc["steps"]),
            final_distance_m=float(doc["final_distance_m"]),
            path_length_m=float(doc["path_length_m"]),
            obs_digests=tuple(doc["obs_digests"]),
        )


def trajectory_length(trajectory) -> float:
    total = 0.0
    for (x0, y0, *_), (x1, y1, *_) in zip(trajectory, trajectory[1:]):
        total += math.hypot(x1 - x0, y1 - y0)
    return total


def make_record(state: EpisodeState) -> EpisodeRecord:
    traj = tuple((p.x, p.y, p.heading) for p in state.trajectory)
    if state.final_distance_m is None:
        state.final_distance_m = state.distance_to_goal()
    return EpisodeRecord(
        scene_id=state.scene.id,
        poi_id=state.poi.id,
        start=dict(state.start_doc),
        actions=tuple(state.action_log),
        trajectory=traj,
        collisions=state.collisions,
        status=state.status,
        reason=state.reason,
        steps=state.t,
        final_distance_m=state.final_distance_m,
        path_length_m=trajectory_length(traj),
        obs_digests=tuple(state.obs_digests),
    )


def replay(
    scene: Scene,
    record: EpisodeRecord,
    criterion: SuccessCriterion | None = None,
    camera: CameraModel | None = None,
    grid: OccupancyGrid | None = None,
) -> EpisodeRecord:
    """Re-execute a recorded action log from its start pose. The result must
    reproduce the original record exactly; callers compare documents."""
    from .sampler import StartPose  # runtime import: sampler depends on this module

    start = StartPose.from_doc(record.start)
    state, _ = reset(scene, scene.poi_by_id(record.poi_id), start, criterion, camera, grid)
    for entry in record.actions:
        if entry["stop"]:
            stop(state)
        else:
            step(state, Action(waypoints=tuple((float(dx), float(dy)) for dx, dy in entry["waypoints"])))
        if state.status != RUNNING:
            break
    return make_record(state)
