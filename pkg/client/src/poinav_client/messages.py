"""Dataclass mirrors of the benchmark protocol payloads."""
from __future__ import annotations

from dataclasses import dataclass

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7463


@dataclass(frozen=True)
class ServerHello:
    version: int
    scene_id: str
    instruction: str
    camera: dict
    episode_id: str

    @staticmethod
    def from_payload(p: dict) -> "ServerHello":
        return ServerHello(
            version=int(p["version"]),
            scene_id=str(p["scene_id"]),
            instruction=str(p["instruction"]),
            camera=dict(p["camera"]),
            episode_id=str(p["episode_id"]),
        )


@dataclass(frozen=True)
class Obs:
    episode_id: str
    t: int
    observation: dict
    cue: dict | None

    @staticmethod
    def from_payload(p: dict) -> "Obs":
        return Obs(
            episode_id=str(p["episode_id"]),
            t=int(p["t"]),
            observation=dict(p["observation"]),
            cue=None if p.get("cue") is None else dict(p["cue"]),
        )


@dataclass(frozen=True)
class Act:
    episode_id: str
    t: int
    waypoints: tuple = ()
    stop: bool = False

    def to_payload(self) -> dict:
        return {
            "type": "act",
            "episode_id": self.episode_id,
            "t": self.t,
            "waypoints": [[float(dx), float(dy)] for dx, dy in self.waypoints],
            "stop": bool(self.stop),
        }


@dataclass(frozen=True)
class End:
    episode_id: str
    status: str
    reason: str | None
    metrics: dict

    @staticmethod
    def from_payload(p: dict) -> "End":
        return End(
            episode_id=str(p["episode_id"]),
            status=str(p["status"]),
            reason=None if p.get("reason") is None else str(p["reason"]),
            metrics=dict(p["metrics"]),
        )


def hello_payload(name: str) -> dict:
    return {"type": "hello", "version": PROTOCOL_VERSION, "client": name}
