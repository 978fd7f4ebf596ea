"""Batch episode runner: builds validated episode sets over scene files, runs
them to termination under any policy, and persists canonically serialized
results so reruns with the same seed are byte-identical.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .brain import BrainNoise
from .episode import (
    RUNNING,
    Action,
    EpisodeRecord,
    SuccessCriterion,
    default_grid,
    make_record,
    reset,
    step,
    stop,
)
from .errors import NoPathError, PoinavError
from .jsonio import FORMAT_VERSION, canonical_dumps, digest64, q6, stable_hash, write_canonical
from .metrics import compute_metrics
from .planner import ReferencePath, plan_path
from .policies import EpisodeContext, Policy, make_policy
from .render import CameraModel
from .sampler import StartPose, StartSpec, sample_starts
from .scene import Scene, load_scene


@dataclass(frozen=True)
class EpisodeSpec:
    scene_id: str
    poi_id: str
    start: StartPose
    seed: int
    ref_length_m: float

    def to_doc(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "poi_id": self.poi_id,
            "start": self.start.to_doc(),
            "seed": self.seed,
            "ref_length_m": float(self.ref_length_m),
        }

    @staticmethod
    def from_doc(doc: dict) -> "EpisodeSpec":
        return EpisodeSpec(
            scene_id=str(doc["scene_id"]),
            poi_id=str(doc["poi_id"]),
            start=StartPose.from_doc(doc["start"]),
            seed=int(doc["seed"]),
            ref_length_m=float(doc["ref_length_m"]),
        )


@dataclass(frozen=True)
class BenchmarkConfig:
    policy: str = "oracle"
    episodes_per_poi: int = 2
    seed: int = 42
    epsilon: float = 2.0
    max_steps: int = 500
    collision_policy: str = "terminate"
    noise: BrainNoise = field(default_factory=BrainNoise)
    bundle_path: str | None = None

    def criterion(self) -> SuccessCriterion:
        return SuccessCriterion(
            epsilon=self.epsilon, collision_policy=self.collision_policy, max_steps=self.max_steps
        )

    def to_doc(self) -> dict:
        return {
            "policy": self.policy,
            "episodes_per_poi": self.episodes_per_poi,
            "seed": self.seed,
            "epsilon": q6(self.epsilon),
            "max_steps": self.max_steps,
            "collision_policy": self.collision_policy,
            "noise": {
                "p_wrong_poi": q6(self.noise.p_wrong_poi),
                "box_jitter_px": q6(self.noise.box_jitter_px),
                "p_dropout": q6(self.noise.p_dropout),
            },
        }


def plan_to_poi(grid, start, poi, epsilon: float) -> ReferencePath:
    """Shortest plan over all entrances of the POI."""
    best = None
    err: NoPathError | None = None
    for ent in poi.entrances:
        try:
            path = plan_path(grid, start, ent, epsilon)
        except NoPathError as e:
            err = e
            continue
        if best is None or path.length_m < best.length_m:
            best = path
    if best is None:
        raise err or NoPathError("no reachable entrance")
    return best


def episode_content_hash(spec: EpisodeSpec, cfg: BenchmarkConfig) -> str:
    return digest64(canonical_dumps({"episode": spec.to_doc(), "config": cfg.to_doc()}))


def build_episodes(
    scenes: dict[str, Scene],
    cfg: BenchmarkConfig,
    start_spec: StartSpec | None = None,
    camera: CameraModel | None = None,
) -> list[EpisodeSpec]:
    """Sample per-POI starts (deterministically derived seeds) and attach the
    per-start optimal reference length used by the path-efficiency metric."""
    camera = camera or CameraModel()
    episodes: list[EpisodeSpec] = []
    for scene_id in sorted(scenes):
        scene = scenes[scene_id]
        grid = default_grid(scene)
        for poi in scene.pois:
            seed = (cfg.seed ^ stable_hash(f"{scene_id}/{poi.id}")) & 0x7FFFFFFFFFFFFFFF
            spec = start_spec or StartSpec(n_starts=cfg.episodes_per_poi)
            if spec.n_starts != cfg.episodes_per_poi:
                spec = replace(spec, n_starts=cfg.episodes_per_poi)
            starts = sample_starts(scene, grid, poi, spec, seed, camera)
            for k, start in enumerate(starts):
                ref = plan_to_poi(grid, start.position, poi, cfg.epsilon)
                episodes.append(
                    EpisodeSpec(
                        scene_id=scene_id,
                        poi_id=poi.id,
                        start=start,
                        seed=(seed + k) & 0x7FFFFFFFFFFFFFFF,
                        ref_length_m=ref.length_m,
                    )
                )
    return episodes


def run_episode(
    scene: Scene,
    spec: EpisodeSpec,
    policy: Policy,
    cfg: BenchmarkConfig,
    camera: CameraModel | None = None,
) -> EpisodeRecord:
    camera = camera or CameraModel()
    grid = default_grid(scene)
    poi = scene.poi_by_id(spec.poi_id)
    criterion = cfg.criterion()
    ctx = EpisodeContext(
        scene=scene,
        poi=poi,
        grid=grid,
        camera=camera,
        criterion=criterion,
        seed=spec.seed,
        path=plan_to_poi(grid, spec.start.position, poi, cfg.epsilon) if policy.privileged else None,
        noise=cfg.noise,
    )
    policy.begin(ctx)
    state, obs = reset(scene, poi, spec.start, criterion, camera, grid)
    while state.status == RUNNING:
        decision = policy.decide(obs, pose=state.pose.copy() if policy.privileged else None)
        if decision.stop:
            stop(state)
            break
        state, obs = step(state, Action(waypoints=tuple(decision.waypoints)))
    return make_record(state)


def _run_indexed(args):
    scene_doc_path, spec_doc, cfg, camera_doc = args
    scene = load_scene(scene_doc_path)
    spec = EpisodeSpec.from_doc(spec_doc)
    policy = make_policy(cfg.policy, cfg.bundle_path)
    return run_episode(scene, spec, policy, cfg, CameraModel.from_doc(camera_doc)).to_doc()


@dataclass
class BenchmarkRun:
    config: BenchmarkConfig
    episodes: list[EpisodeSpec]
    records: list[EpisodeRecord] = field(default_factory=list)
    scene_files: dict = field(default_factory=dict)  # scene id -> source path

    def reference_lengths(self) -> list[float]:
        return [e.ref_length_m for e in self.episodes]

    def to_doc(self) -> dict:
        metrics = compute_metrics(self.records, self.reference_lengths())
        return {
            "format_version": FORMAT_VERSION,
            "config": self.config.to_doc(),
            "scene_files": {k: str(v) for k, v in sorted(self.scene_files.items())},
            "episodes": [e.to_doc() for e in self.episodes],
            "records": [r.to_doc() for r in self.records],
            "metrics": metrics.to_doc(),
        }

    def save(self, path) -> None:
        write_canonical(path, self.to_doc())


def load_results(path) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def run_benchmark(
    scenes: dict[str, Scene],
    cfg: BenchmarkConfig,
    episodes: list[EpisodeSpec] | None = None,
    camera: CameraModel | None = None,
    workers: int = 1,
    previous: dict | None = None,
    scene_paths: dict[str, str] | None = None,
) -> BenchmarkRun:
    """Run every episode to termination. Per-episode failures are recorded,
    never raised. With `previous` results, episodes whose content hash already
    has a record are skipped (resume). Records always come back in episode
    order, regardless of worker scheduling."""
    camera = camera or CameraModel()
    if episodes is None:
        episodes = build_episodes(scenes, cfg, camera=camera)
    run = BenchmarkRun(config=cfg, episodes=episodes, scene_files=dict(scene_paths or {}))

    done: dict[str, dict] = {}
    if previous:
        prev_eps = [EpisodeSpec.from_doc(d) for d in previous.get("episodes", [])]
        for spec_prev, rec in zip(prev_eps, previous.get("records", [])):
            done[episode_content_hash(spec_prev, cfg)] = rec

    results: list[EpisodeRecord | None] = [None] * len(episodes)
    pending: list[int] = []
    for i, spec in enumerate(episodes):
        h = episode_content_hash(spec, cfg)
        if h in done:
            results[i] = EpisodeRecord.from_doc(done[h])
        else:
            pending.append(i)

    if workers > 1 and scene_paths and not cfg.policy.startswith("remote:"):
        jobs = [(scene_paths[episodes[i].scene_id], episodes[i].to_doc(), cfg, camera.to_doc()) for i in pending]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            for i, doc in zip(pending, ex.map(_run_indexed, jobs)):
                results[i] = EpisodeRecord.from_doc(doc)
    else:
        for i in pending:
            spec = episodes[i]
            scene = scenes[spec.scene_id]
            try:
                policy = make_policy(cfg.policy, cfg.bundle_path)
                results[i] = run_episode(scene, spec, policy, cfg, camera)
            except PoinavError as e:
                results[i] = EpisodeRecord(
                    scene_id=spec.scene_id,
                    poi_id=spec.poi_id,
                    start=spec.start.to_doc(),
                    actions=(),
                    trajectory=((spec.start.position[0], spec.start.position[1], spec.start.heading),),
                    collisions=0,
                    status="error",
                    reason=str(e),
                    steps=0,
                    final_distance_m=scenes[spec.scene_id].poi_by_id(spec.poi_id).distance_to(spec.start.position),
                    path_length_m=0.0,
                    obs_digests=(),
                )
    run.records = list(results)
    return run


def load_scene_dir(path) -> tuple[dict[str, Scene], dict[str, str]]:
    """Load every *.json scene under a directory (or a single file)."""
    import os

    scenes: dict[str, Scene] = {}
    paths: dict[str, str] = {}
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".json"))
        files = [os.path.join(path, n) for n in names]
    else:
        files = [path]
    for f in files:
        scene = load_scene(f)
        scenes[scene.id] = scene
        paths[scene.id] = f
    return scenes, paths
