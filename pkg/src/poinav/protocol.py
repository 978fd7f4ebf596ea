"""Length-prefixed JSON framing for out-of-process policies.

Frame bytes: [u32 big-endian payload length][UTF-8 JSON payload]. Payloads
are objects with a mandatory "type" field:

  hello  client -> server {type, version}; server -> client adds scene_id,
         instruction, camera, episode_id
  obs    server -> client {type, episode_id, t, observation, cue}
  act    client -> server {type, episode_id, t, waypoints, stop}
  end    server -> client {type, episode_id, status, reason, metrics}
  error  either direction {type, code, detail}

The loop is strictly lock-step: one outstanding observation at a time, and
an act must echo the t of the latest obs.
"""
from __future__ import annotations

import json
import struct

from .errors import DecodeError, ProtocolError

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7463
MAX_FRAME = 16 * 1024 * 1024
IDLE_TIMEOUT_S = 30.0

MSG_TYPES = ("hello", "obs", "act", "end", "error")


def encode_frame(payload: dict) -> bytes:
    data = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")
    if len(data) > MAX_FRAME:
        raise ProtocolError("frame", f"payload of {len(data)} bytes exceeds {MAX_FRAME}")
    return struct.pack(">I", len(data)) + data


class FrameDecoder:
    """Incremental decoder; feed() arbitrary chunks, get complete payloads.
    Splitting the byte stream at any boundary must not change the output."""

    def __init__(self):
        self._buf = bytearray()
        self._offset = 0  # absolute offset of buffer start in the stream

    def feed(self, chunk: bytes) -> list[dict]:
        self._buf.extend(chunk)
        out = []
        while True:
            if len(self._buf) < 4:
                return out
            (length,) = struct.unpack(">I", self._buf[:4])
            if length > MAX_FRAME:
                raise DecodeError(f"frame length {length} exceeds {MAX_FRAME}", self._offset)
            if len(self._buf) < 4 + length:
                return out
            payload = bytes(self._buf[4 : 4 + length])
            try:
                obj = json.loads(payload.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as e:
                raise DecodeError(f"bad payload: {e}", self._offset + 4) from e
            if not isinstance(obj, dict) or "type" not in obj:
                raise DecodeError("payload is not an object with a type field", self._offset + 4)
            out.append(obj)
            del self._buf[: 4 + length]
            self._offset += 4 + length


def hello_client(name: str = "client") -> dict:
    return {"type": "hello", "version": PROTOCOL_VERSION, "client": name}


def hello_server(scene_id: str, instruction: str, camera_doc: dict, episode_id: str) -> dict:
    return {
        "type": "hello",
        "version": PROTOCOL_VERSION,
        "format_version": 1,
        "scene_id": scene_id,
        "instruction": instruction,
        "camera": camera_doc,
        "episode_id": episode_id,
    }


def obs_message(episode_id: str, t: int, observation_doc: dict, cue_doc: dict | None) -> dict:
    return {"type": "obs", "episode_id": episode_id, "t": t, "observation": observation_doc, "cue": cue_doc}


def act_message(episode_id: str, t: int, waypoints, stop: bool) -> dict:
    return {
        "type": "act",
        "episode_id": episode_id,
        "t": t,
        "waypoints": [[float(dx), float(dy)] for dx, dy in waypoints],
        "stop": bool(stop),
    }


def end_message(episode_id: str, status: str, reason: str | None, metrics: dict) -> dict:
    return {"type": "end", "episode_id": episode_id, "status": status, "reason": reason, "metrics": metrics}


def error_message(code: str, detail: str) -> dict:
    return {"type": "error", "code": code, "detail": detail}
