"""Geometric action head: budgeted temporal context sampling, a deterministic
hand-crafted featurizer, and latent-query waypoint decoding.

The decode path is exact and small: single-head scaled-dot-product cross
attention from a fixed set of learnable queries into the context tokens,
followed by a two-layer tanh MLP whose outputs are squashed so every decoded
waypoint respects the simulator's step bound by construction.
"""
from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EmptyContextError
from .render import DEFAULT_COLUMNS, DEFAULT_ROWS, Observation

FEATURE_DIM = 32
DEPTH_BINS = 16
DEFAULT_QUERIES = 4
DEFAULT_HORIZON = 8
DEFAULT_HIDDEN = 64
DEFAULT_MAX_STEP = 0.5

BUNDLE_MAGIC = b"PNAV"
BUNDLE_VERSION = 1


def elastic_sample(t: int, budget: int) -> list[int]:
    """Budgeted time-dilated frame indices over [0, t].

    Returns the sorted, deduplicated set {floor(k*t/budget) : k=0..budget}
    with the current frame t always included; at most budget+1 indices.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    idx = {(k * t) // budget for k in range(budget + 1)}
    idx.add(t)
    return sorted(idx)


@dataclass(frozen=True)
class TemporalContext:
    indices: tuple[int, ...]
    frames: tuple[Observation, ...]
    budget: int


def build_context(history, budget: int) -> TemporalContext:
    """Sample the episode history (oldest first) down to the index budget."""
    if not history:
        raise EmptyContextError("no frames in history")
    t = len(history) - 1
    idx = elastic_sample(t, budget)
    return TemporalContext(indices=tuple(idx), frames=tuple(history[i] for i in idx), budget=budget)


def _depth_bins(obs: Observation, max_range: float) -> np.ndarray:
    d = np.minimum(np.nan_to_num(obs.depth, posinf=max_range), max_range) / max_range
    n = len(d)
    per = n // DEPTH_BINS
    return d[: per * DEPTH_BINS].reshape(DEPTH_BINS, per).mean(axis=1)


def encode_context(ctx: TemporalContext, cue, max_range: float = 50.0) -> np.ndarray:
    """Featurize the sampled frames plus one cue token into a
    (len(frames)+1, 32) matrix.

    Per-frame token: 16 normalized depth bins, the cue target's box center
    column (normalized) and visible fraction in that frame, the cue kind
    one-hot, and the normalized age of the frame. The trailing cue token
    carries the handed-over box itself.
    """
    if not ctx.frames:
        raise EmptyContextError("context has no frames")
    t_now = ctx.indices[-1]
    tokens = np.zeros((len(ctx.frames) + 1, FEATURE_DIM))
    kind_onehot = (1.0, 0.0) if cue is not None and cue.kind == "entrance" else (0.0, 1.0)
    for i, (tau, obs) in enumerate(zip(ctx.indices, ctx.frames)):
        tokens[i, :DEPTH_BINS] = _depth_bins(obs, max_range)
        if cue is not None:
            b = obs.box_for(cue.source_poi, cue.kind)
            if b is not None:
                tokens[i, DEPTH_BINS] = b.box.center()[0] / max(1, len(obs.depth))
                tokens[i, DEPTH_BINS + 3] = b.fraction
            tokens[i, DEPTH_BINS + 1 : DEPTH_BINS + 3] = kind_onehot
        tokens[i, DEPTH_BINS + 4] = (t_now - tau) / max(1, t_now)
    if cue is not None:
        tokens[-1, 0] = cue.box.x0 / DEFAULT_COLUMNS
        tokens[-1, 1] = cue.box.y0 / DEFAULT_ROWS
        tokens[-1, 2] = cue.box.x1 / DEFAULT_COLUMNS
        tokens[-1, 3] = cue.box.y1 / DEFAULT_ROWS
        tokens[-1, 4:6] = kind_onehot
        tokens[-1, 6] = 1.0
    return tokens


# -- weights ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightBundle:
    queries: np.ndarray  # (N, d)
    key_proj: np.ndarray  # (d, d)
    value_proj: np.ndarray  # (d, d)
    out_proj: np.ndarray  # (d, d)
    hidden_w: np.ndarray  # (N*d, hidden)
    hidden_b: np.ndarray  # (hidden,)
    out_w: np.ndarray  # (hidden, H*2)
    out_b: np.ndarray  # (H*2,)

    def __post_init__(self):
        d = self.key_proj.shape[0]
        n = self.queries.shape[0]
        hidden = self.hidden_b.shape[0]
        h2 = self.out_b.shape[0]
        chain = (
            self.queries.shape == (n, d)
            and self.key_proj.shape == (d, d)
            and self.value_proj.shape == (d, d)
            and self.out_proj.shape == (d, d)
            and self.hidden_w.shape == (n * d, hidden)
            and self.out_w.shape == (hidden, h2)
            and h2 % 2 == 0
        )
        if not chain:
            raise DimensionError(
                f"inconsistent dimension chain: d={d} N={n} hidden={hidden} out={h2}"
            )

    @property
    def feature_dim(self) -> int:
        return self.key_proj.shape[0]

    @property
    def n_queries(self) -> int:
        return self.queries.shape[0]

    @property
    def horizon(self) -> int:
        return self.out_b.shape[0] // 2

    @property
    def hidden_dim(self) -> int:
        return self.hidden_b.shape[0]

    def matrices(self):
        return (
            self.queries, self.key_proj, self.value_proj, self.out_proj,
            self.hidden_w, self.hidden_b, self.out_w, self.out_b,
        )


def default_bundle(seed: int = 0, d: int = FEATURE_DIM, n_queries: int = DEFAULT_QUERIES,
                   horizon: int = DEFAULT_HORIZON, hidden: int = DEFAULT_HIDDEN) -> WeightBundle:
    rng = np.random.default_rng(seed)
    scale = 1.0 / math.sqrt(d)
    return WeightBundle(
        queries=rng.normal(0, scale, (n_queries, d)),
        key_proj=rng.normal(0, scale, (d, d)),
        value_proj=rng.normal(0, scale, (d, d)),
        out_proj=rng.normal(0, scale, (d, d)),
        hidden_w=rng.normal(0, 1.0 / math.sqrt(n_queries * d), (n_queries * d, hidden)),
        hidden_b=np.zeros(hidden),
        out_w=rng.normal(0, 1.0 / math.sqrt(hidden), (hidden, horizon * 2)),
        out_b=np.zeros(horizon * 2),
    )


def save_bundle(bundle: WeightBundle, path) -> None:
    """Binary layout: magic, u32 version, u32 dims (d, N, H, hidden), then
    row-major float32 matrices in declared order, trailing CRC32. All fields
    little-endian."""
    body = bytearray()
    body += BUNDLE_MAGIC
    body += struct.pack(
        "<5I", BUNDLE_VERSION, bundle.feature_dim, bundle.n_queries, bundle.horizon, bundle.hidden_dim
    )
    for m in bundle.matrices():
        body += np.ascontiguousarray(m, dtype="<f4").tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    with open(path, "wb") as f:
        f.write(bytes(body))


def load_bundle(path) -> WeightBundle:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 28 or raw[:4] != BUNDLE_MAGIC:
        raise DimensionError("not a weight bundle (bad magic)")
    crc_stored = struct.unpack("<I", raw[-4:])[0]
    if zlib.crc32(raw[:-4]) & 0xFFFFFFFF != crc_stored:
        raise DimensionError("weight bundle CRC mismatch")
    version, d, n, horizon, hidden = struct.unpack("<5I", raw[4:24])
    if version != BUNDLE_VERSION:
        raise DimensionError(f"unsupported bundle version {version}")
    shapes = [
        (n, d), (d, d), (d, d), (d, d),
        (n * d, hidden), (hidden,), (hidden, horizon * 2), (horizon * 2,),
    ]
    off = 24
    mats = []
    for shape in shapes:
        count = int(np.prod(shape))
        end = off + 4 * count
        if end > len(raw) - 4:
            raise DimensionError("weight bundle truncated")
        mats.append(np.frombuffer(raw[off:end], dtype="<f4").astype(np.float64).reshape(shape))
        off = end
    if off != len(raw) - 4:
        raise DimensionError("weight bundle has trailing bytes")
    return WeightBundle(*mats)


# -- decoding --------------------------------------------------------------------


@dataclass(frozen=True)
class WaypointPlan:
    waypoints: tuple[tuple[float, float], ...]

    @property
    def horizon(self) -> int:
        return len(self.waypoints)


def cross_attention(tokens: np.ndarray, weights: WeightBundle) -> tuple[np.ndarray, np.ndarray]:
    """Scaled dot-product attention of the learnable queries over the context
    tokens. Returns (attention rows, attended latents); each latent row is a
    convex combination of the value-projected tokens.

    Reductions over the token axis use exactly rounded summation, so
    co-permuting keys and values leaves the output bit-identical.
    """
    d = weights.feature_dim
    if tokens.ndim != 2 or tokens.shape[1] != d:
        raise DimensionError(f"tokens must be (*, {d}), got {tokens.shape}")
    n = tokens.shape[0]
    if n == 0:
        raise EmptyContextError("no tokens to attend over")
    keys = tokens @ weights.key_proj
    values = tokens @ weights.value_proj
    scores = weights.queries @ keys.T / math.sqrt(d)
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    denom = np.array([math.fsum(row) for row in e])
    attn = e / denom[:, None]
    n_q = attn.shape[0]
    z = np.empty((n_q, d))
    for i in range(n_q):
        contrib = attn[i][:, None] * values
        for k in range(d):
            z[i, k] = math.fsum(contrib[:, k])
    return attn, z


def decode_waypoints(latents: np.ndarray, weights: WeightBundle,
                     max_step: float = DEFAULT_MAX_STEP) -> WaypointPlan:
    """Two-layer tanh MLP over the flattened latents. The final tanh is
    scaled by max_step/sqrt(2) per axis so the Euclidean step bound holds for
    any weights."""
    pre = (latents @ weights.out_proj).ravel()
    hidden = np.tanh(pre @ weights.hidden_w + weights.hidden_b)
    raw = hidden @ weights.out_w + weights.out_b
    scale = max_step / math.sqrt(2.0)
    flat = scale * np.tanh(raw)
    wps = tuple((float(x), float(y)) for x, y in flat.reshape(-1, 2))
    return WaypointPlan(waypoints=wps)


def latent_query(tokens: np.ndarray, weights: WeightBundle,
                 max_step: float = DEFAULT_MAX_STEP) -> WaypointPlan:
    """Full decode: cross-attention bottleneck then MLP waypoint regression."""
    _, latents = cross_attention(tokens, weights)
    return decode_waypoints(latents, weights, max_step)


def decode_jacobian(latents: np.ndarray, weights: WeightBundle,
                    max_step: float = DEFAULT_MAX_STEP) -> np.ndarray:
    """Analytic Jacobian of the decoded waypoints w.r.t. the latent entries,
    shape (H*2, N*d). Used to validate the decode math against finite
    differences; there is no training loop."""
    n, d = latents.shape
    pre = (latents @ weights.out_proj).ravel()
    hidden_in = pre @ weights.hidden_w + weights.hidden_b
    hidden = np.tanh(hidden_in)
    raw = hidden @ weights.out_w + weights.out_b
    scale = max_step / math.sqrt(2.0)

    # d pre / d latents: block-diagonal copies of out_proj^T, one per latent row.
    d_pre = np.zeros((n * d, n * d))
    for i in range(n):
        d_pre[i * d : (i + 1) * d, i * d : (i + 1) * d] = weights.out_proj.T
    d_hidden = (1.0 - hidden**2)[:, None] * (weights.hidden_w.T @ d_pre)  # (hidden, N*d)
    d_raw = weights.out_w.T @ d_hidden  # (H*2, N*d)
    return scale * (1.0 - np.tanh(raw) ** 2)[:, None] * d_raw
