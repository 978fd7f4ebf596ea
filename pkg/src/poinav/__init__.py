"""poinav: closed-loop benchmark engine for storefront-entrance navigation.

Procedurally generated commercial-street scenes, an egocentric POMDP
simulator with continuous waypoint actions, occupancy-grid reference
planning, SR/SPL metrics, a signage-to-entrance grounding pipeline with a
deterministic geometric judge, and a wire protocol for out-of-process
policies.
"""

from .action import WeightBundle, WaypointPlan, build_context, elastic_sample, encode_context, latent_query
from .brain import BrainNoise, Cue, GroundingResult, ground, select_cue
from .episode import (
    Action,
    EpisodeRecord,
    EpisodeState,
    Pose,
    SuccessCriterion,
    distance_to_entrance,
    replay,
    reset,
    step,
    stop,
)
from .generator import GeneratorSpec, generate_scene
from .harness import BenchmarkConfig, BenchmarkRun, build_episodes, run_benchmark
from .judge import JudgeThresholds, JudgeVerdict, judge
from .metrics import MetricsReport, compute_metrics, compute_spl
from .navgrid import OccupancyGrid, segment_traversable
from .planner import ReferencePath, plan_path
from .render import CameraModel, Observation, VisibilityReport, render, visibility
from .sampler import StartPose, StartSpec, sample_starts
from .scene import POI, EntranceRegion, Obstacle, Scene, Signage, load_scene, save_scene

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BenchmarkConfig",
    "BenchmarkRun",
    "BrainNoise",
    "CameraModel",
    "Cue",
    "EntranceRegion",
    "EpisodeRecord",
    "EpisodeState",
    "GeneratorSpec",
    "GroundingResult",
    "JudgeThresholds",
    "JudgeVerdict",
    "MetricsReport",
    "Observation",
    "OccupancyGrid",
    "POI",
    "Obstacle",
    "Pose",
    "ReferencePath",
    "Scene",
    "Signage",
    "StartPose",
    "StartSpec",
    "SuccessCriterion",
    "VisibilityReport",
    "WaypointPlan",
    "WeightBundle",
    "build_context",
    "build_episodes",
    "compute_metrics",
    "compute_spl",
    "distance_to_entrance",
    "elastic_sample",
    "encode_context",
    "generate_scene",
    "ground",
    "judge",
    "latent_query",
    "load_scene",
    "plan_path",
    "render",
    "replay",
    "reset",
    "run_benchmark",
    "sample_starts",
    "save_scene",
    "segment_traversable",
    "select_cue",
    "step",
    "stop",
    "visibility",
]
