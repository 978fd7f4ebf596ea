"""Wire framing: [u32 big-endian payload length][UTF-8 JSON payload].

Independent mirror of the benchmark server's framing; byte-compatibility is
pinned by the golden frame fixture shared between the two packages.
"""
from __future__ import annotations

import json
import struct

from .errors import DecodeError

MAX_FRAME = 16 * 1024 * 1024


def encode_frame(payload: dict) -> bytes:
    data = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")
    if len(data) > MAX_FRAME:
        raise ValueError(f"payload of {len(data)} bytes exceeds {MAX_FRAME}")
    return struct.pack(">I", len(data)) + data


class FrameParser:
    """Incremental frame parser; feed arbitrary chunks, collect payloads.
    Output is invariant to how the byte stream is split."""

    def __init__(self):
        self._buf = bytearray()
        self._offset = 0

    def feed(self, chunk: bytes) -> list[dict]:
        self._buf.extend(chunk)
        frames = []
        while len(self._buf) >= 4:
            (length,) = struct.unpack(">I", self._buf[:4])
            if length > MAX_FRAME:
                raise DecodeError(f"frame length {length} exceeds limit", self._offset)
            if len(self._buf) < 4 + length:
                break
            raw = bytes(self._buf[4 : 4 + length])
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as e:
                raise DecodeError(f"undecodable payload: {e}", self._offset + 4) from e
            if not isinstance(payload, dict) or "type" not in payload:
                raise DecodeError("payload must be an object with a type field", self._offset + 4)
            frames.append(payload)
            del self._buf[: 4 + length]
            self._offset += 4 + length
        return frames

    @property
    def pending_bytes(self) -> int:
        return len(self._buf)
