"""Reference policies over the wire observation schema.

These operate purely on the JSON payloads the server sends; there is no
dependency on the benchmark engine.
"""
from __future__ import annotations

import math
import random

MAX_STEP_M = 0.5
SCAN_TURN_RAD = math.radians(35.0)
SCAN_STEP_M = 0.05


def random_policy(seed: int = 0):
    rng = random.Random(seed)

    def decide(observation: dict, cue: dict | None):
        th = rng.uniform(-math.pi, math.pi)
        r = rng.uniform(0.0, MAX_STEP_M)
        return [(r * math.cos(th), r * math.sin(th))], False

    return decide


def idle_policy():
    """Stands still forever; the episode times out."""

    def decide(observation: dict, cue: dict | None):
        return [(0.0, 0.0)], False

    return decide


def replay_policy(action_log: list):
    """Echo a recorded action log entry by entry."""
    entries = iter(action_log)

    def decide(observation: dict, cue: dict | None):
        entry = next(entries)
        return [tuple(wp) for wp in entry["waypoints"]], bool(entry["stop"])

    return decide


class CuePursuit:
    """Steer at the server-provided cue box; scan in place without one.

    Needs the per-episode camera intrinsics from the session hello, so build
    it per episode: run_benchmark(host, port, lambda s: CuePursuit(s.camera)).
    """

    def __init__(self, camera: dict, epsilon: float = 2.0):
        self.n_columns = int(camera["n_columns"])
        self.n_rows = int(camera["n_rows"])
        self.hfov = math.radians(float(camera["hfov_deg"]))
        self.vfov = math.radians(float(camera["vfov_deg"]))
        self.height = float(camera["height"])
        self.epsilon = epsilon

    def _entrance_fraction(self, observation: dict, cue: dict) -> float:
        for b in observation["boxes"]:
            if b["poi"] == cue["source_poi"] and b["kind"] == "entrance":
                return float(b["fraction"])
        return 0.0

    def __call__(self, observation: dict, cue: dict | None):
        if cue is None:
            return [(SCAN_STEP_M * math.cos(SCAN_TURN_RAD), SCAN_STEP_M * math.sin(SCAN_TURN_RAD))], False
        x0, y0, x1, y1 = cue["box"]
        col = min(max(0.5 * (x0 + x1), 0.0), self.n_columns - 1e-9)
        depth = observation["columns"]["depth"][int(col)]
        depth = math.inf if depth is None else float(depth)
        if cue["kind"] == "entrance":
            if self._entrance_fraction(observation, cue) >= 0.9 and depth <= self.epsilon:
                return [], True
            elev = self.vfov / 2 - y1 * self.vfov / self.n_rows
            if elev < 0 and self.height / math.tan(-elev) <= self.epsilon / 2:
                return [], True
        rel = self.hfov / 2 - col * self.hfov / self.n_columns
        step = MAX_STEP_M
        if math.isfinite(depth):
            step = min(MAX_STEP_M, max(0.1, depth - self.epsilon / 2))
        return [(step * math.cos(rel), step * math.sin(rel))], False
