"""Canonical JSON serialization.

Every artifact this package persists (scenes, paths, results, observation
digests) goes through the same writer so that equal values always produce
equal bytes: keys sorted, floats printed with 6 significant digits, LF line
endings, trailing newline.
"""
from __future__ import annotations

import hashlib
import json
import math
from typing import Any

FORMAT_VERSION = 1


def q6(x: float) -> float:
    """Quantize to the value round-trippable through a 6-significant-digit
    decimal. Generators pass every float through this so that
    load(save(scene)) is exact."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite float not serializable: {x}")
    if x == 0.0:
        return 0.0
    return float(f"{x:.6g}")


def _fmt_float(x: float, g6: bool) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in canonical document")
    if x == 0.0:
        return "0"
    if g6:
        return f"{x:.6g}"
    return repr(x)  # shortest exact round-trip


def _is_scalar(v: Any) -> bool:
    return v is None or isinstance(v, (bool, int, float, str))


def _encode(obj: Any, indent: int, out: list, g6: bool) -> None:
    pad = " " * indent
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj, g6))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj.keys())
        for i, k in enumerate(keys):
            if not isinstance(k, str):
                raise TypeError(f"non-string key: {k!r}")
            out.append(pad + "  " + json.dumps(k, ensure_ascii=False) + ": ")
            _encode(obj[k], indent + 2, out, g6)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(_is_scalar(v) for v in items):
            parts = []
            for v in items:
                sub: list = []
                _encode(v, 0, sub, g6)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append(pad + "  ")
            _encode(v, indent + 2, out, g6)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "]")
    else:
        raise TypeError(f"not canonically serializable: {type(obj)}")


def canonical_dumps(obj: Any, g6_floats: bool = False) -> str:
    """Deterministic JSON text: sorted keys, LF, trailing newline. Floats are
    shortest-round-trip by default; scene documents use the 6-significant-
    digit style instead."""
    out: list = []
    _encode(obj, 0, out, g6_floats)
    out.append("\n")
    return "".join(out)


def write_canonical(path, obj: Any, g6_floats: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_dumps(obj, g6_floats))


def digest64(data: bytes | str) -> str:
    """64-bit content digest as 16 hex chars (truncated SHA-256)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]


def stable_hash(text: str) -> int:
    """Platform-stable 63-bit hash for seed derivation."""
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big") >> 1
