"""Benchmark metrics: success rates, path-length-weighted success, collision
rate. All quantities are recomputable from persisted episode records alone.
"""
from __future__ import annotations

from dataclasses import dataclass

from .episode import SUCCESS, EpisodeRecord
from .errors import LengthError
from .jsonio import q6

STRICT_EPSILON = 0.5  # "precisely reaches": strict-success distance


@dataclass(frozen=True)
class MetricsReport:
    sr: float  # strict success (stop within STRICT_EPSILON, collision-free)
    sr_2m: float  # success under the run's epsilon (2 m by default)
    spl: float
    collision_rate: float
    mean_steps: float
    n_episodes: int
    per_scene: dict

    def to_doc(self) -> dict:
        return {
            "sr": q6(self.sr),
            "sr_2m": q6(self.sr_2m),
            "spl": q6(self.spl),
            "collision_rate": q6(self.collision_rate),
            "mean_steps": q6(self.mean_steps),
            "n_episodes": self.n_episodes,
            "per_scene": {
                k: {m: (q6(v) if isinstance(v, float) else v) for m, v in row.items()}
                for k, row in self.per_scene.items()
            },
        }


def _success(record: EpisodeRecord) -> bool:
    return record.status == SUCCESS


def _strict_success(record: EpisodeRecord) -> bool:
    return record.status == SUCCESS and record.final_distance_m <= STRICT_EPSILON


def compute_spl(records: list[EpisodeRecord], reference_lengths: list[float]) -> float:
    """Mean of S_i * l_i / max(p_i, l_i) over episodes: successes weighted by
    how close the executed path came to the per-start optimal length."""
    if len(records) != len(reference_lengths):
        raise LengthError("one reference length per record required")
    if not records:
        return 0.0
    total = 0.0
    for rec, l in zip(records, reference_lengths):
        if l <= 0:
            raise LengthError(f"non-positive reference length {l}")
        if _success(rec):
            total += l / max(rec.path_length_m, l)
    return total / len(records)


def _bucket(records, lengths) -> dict:
    n = len(records)
    if n == 0:
        return {"sr": 0.0, "sr_2m": 0.0, "spl": 0.0, "collision_rate": 0.0, "mean_steps": 0.0, "n": 0}
    return {
        "sr": sum(map(_strict_success, records)) / n,
        "sr_2m": sum(map(_success, records)) / n,
        "spl": compute_spl(records, lengths),
        "collision_rate": sum(1 for r in records if r.collisions > 0) / n,
        "mean_steps": sum(r.steps for r in records) / n,
        "n": n,
    }


def compute_metrics(records: list[EpisodeRecord], reference_lengths: list[float]) -> MetricsReport:
    overall = _bucket(records, reference_lengths)
    scenes = sorted({r.scene_id for r in records})
    per_scene = {}
    for sid in scenes:
        idx = [i for i, r in enumerate(records) if r.scene_id == sid]
        per_scene[sid] = _bucket([records[i] for i in idx], [reference_lengths[i] for i in idx])
    return MetricsReport(
        sr=overall["sr"],
        sr_2m=overall["sr_2m"],
        spl=overall["spl"],
        collision_rate=overall["collision_rate"],
        mean_steps=overall["mean_steps"],
        n_episodes=overall["n"],
        per_scene=per_scene,
    )
