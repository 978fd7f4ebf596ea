"""Semantic brain: two-stage signage-to-entrance grounding with an injectable
noise model, plus the deterministic cue handover.

The brain is a ground-truth-plus-noise oracle standing in for a learned
perception stack: stage one anchors the target's sign plate among the visible
signage, stage two localizes an entrance box belonging to the anchored POI
and never to any other. This ordering is a structural prior: an entrance can
only be produced for the POI whose signage was anchored.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoCueError, UnknownPOIError
from .render import CameraModel, Observation, PoiBox, RasterBox
from .scene import Scene

ANCHORED_ONLY = "anchored_only"
FULLY_GROUNDED = "fully_grounded"
NOT_FOUND = "not_found"

CUE_ENTRANCE = "entrance"
CUE_SIGNAGE = "signage"


@dataclass
class BrainNoise:
    """Injectable error regime: wrong-POI anchoring probability, uniform box
    corner jitter (in raster units), and dropout despite visibility. Carries
    its own seeded stream; reuse one instance across an episode."""

    p_wrong_poi: float = 0.0
    box_jitter_px: float = 0.0
    p_dropout: float = 0.0
    seed: int = 0
    _rng: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("p_wrong_poi", "p_dropout"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.box_jitter_px < 0:
            raise ValueError("box_jitter_px must be >= 0")

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng

    def reseeded(self, seed: int) -> "BrainNoise":
        return BrainNoise(self.p_wrong_poi, self.box_jitter_px, self.p_dropout, seed)


@dataclass(frozen=True)
class GroundingResult:
    signage_box: RasterBox | None
    entrance_box: RasterBox | None
    poi_id: str | None  # POI the boxes were actually taken from
    stage: str

    def __post_init__(self):
        # At close range the sign can leave the vertical field of view while
        # the entrance stays grounded, so fully-grounded only promises b_geo.
        if self.stage == FULLY_GROUNDED and self.entrance_box is None:
            raise ValueError("fully grounded requires the entrance box")
        if self.stage == ANCHORED_ONLY and (self.signage_box is None or self.entrance_box is not None):
            raise ValueError("anchored-only requires exactly the signage box")


@dataclass(frozen=True)
class Cue:
    box: RasterBox
    kind: str  # CUE_ENTRANCE | CUE_SIGNAGE
    source_poi: str

    def to_doc(self) -> dict:
        return {
            "box": [self.box.x0, self.box.y0, self.box.x1, self.box.y1],
            "kind": self.kind,
            "source_poi": self.source_poi,
        }

    @staticmethod
    def from_doc(doc: dict) -> "Cue":
        x0, y0, x1, y1 = (float(v) for v in doc["box"])
        return Cue(box=RasterBox(x0, y0, x1, y1), kind=str(doc["kind"]), source_poi=str(doc["source_poi"]))


def _jitter(box: RasterBox, noise: BrainNoise, camera: CameraModel) -> RasterBox:
    if noise.box_jitter_px <= 0:
        return box
    j = noise.rng.uniform(-noise.box_jitter_px, noise.box_jitter_px, size=4)
    x0 = min(box.x0 + j[0], box.x1 + j[1])
    x1 = max(box.x0 + j[0], box.x1 + j[1])
    y0 = min(box.y0 + j[2], box.y1 + j[3])
    y1 = max(box.y0 + j[2], box.y1 + j[3])
    return RasterBox(
        x0=float(np.clip(x0, 0, camera.n_columns)),
        y0=float(np.clip(y0, 0, camera.n_rows)),
        x1=float(np.clip(x1, 0, camera.n_columns)),
        y1=float(np.clip(y1, 0, camera.n_rows)),
    )


def _nearest_entrance_box(obs: Observation, poi_id: str, anchor: PoiBox | None) -> PoiBox | None:
    """Entrance box of the given POI nearest to the anchored sign in column
    space; multi-entrance POIs may expose several but the observation merges
    them into one per-POI box, so this is a straight lookup."""
    best = None
    ax = anchor.box.center()[0] if anchor is not None else None
    for b in obs.boxes:
        if b.poi_id == poi_id and b.kind == "entrance":
            if best is None or (
                ax is not None and abs(b.box.center()[0] - ax) < abs(best.box.center()[0] - ax)
            ):
                best = b
    return best


def ground(
    obs: Observation,
    instruction: str,
    scene: Scene,
    noise: BrainNoise | None = None,
    camera: CameraModel | None = None,
) -> GroundingResult:
    """Ground the instructed POI in the current observation.

    Stage 1 anchors a signage box: the target's own unless a wrong-POI noise
    event redirects it to a uniformly random other visible signage. Stage 2
    emits an entrance box only from entrances of the anchored POI. Jitter is
    applied last. Deterministic given the noise seed stream.
    """
    noise = noise or BrainNoise()
    camera = camera or CameraModel()
    target = scene.poi_by_name(instruction)
    if target is None:
        raise UnknownPOIError(f"no POI named {instruction!r}")

    visible_signage = [b for b in obs.boxes if b.kind == "signage" and b.fraction > 0]
    anchor = next((b for b in visible_signage if b.poi_id == target.id), None)
    anchored_id = anchor.poi_id if anchor is not None else None
    if anchored_id is None and obs.box_for(target.id, "entrance") is not None:
        # Near-field regime: the sign has left the vertical field of view but
        # the entrance is still in sight; the semantic identity holds without
        # a signage box.
        anchored_id = target.id

    if anchored_id is not None and noise.p_wrong_poi > 0 and noise.rng.random() < noise.p_wrong_poi:
        others = [b for b in visible_signage if b.poi_id != target.id]
        if others:
            anchor = others[int(noise.rng.integers(len(others)))]
            anchored_id = anchor.poi_id

    if anchored_id is None:
        return GroundingResult(None, None, None, NOT_FOUND)
    if noise.p_dropout > 0 and noise.rng.random() < noise.p_dropout:
        return GroundingResult(None, None, None, NOT_FOUND)

    entrance = _nearest_entrance_box(obs, anchored_id, anchor)
    sign_box = _jitter(anchor.box, noise, camera) if anchor is not None else None
    if entrance is None:
        if sign_box is None:
            return GroundingResult(None, None, None, NOT_FOUND)
        return GroundingResult(sign_box, None, anchored_id, ANCHORED_ONLY)
    return GroundingResult(sign_box, _jitter(entrance.box, noise, camera), anchored_id, FULLY_GROUNDED)


def select_cue(grounding: GroundingResult, obs: Observation) -> Cue:
    """Deterministic visual handover: the entrance box the moment it is
    available, the signage box otherwise. Exactly one branch fires."""
    if grounding.stage == NOT_FOUND:
        raise NoCueError("grounding found nothing; fall back to exploration")
    if grounding.entrance_box is not None:
        return Cue(box=grounding.entrance_box, kind=CUE_ENTRANCE, source_poi=grounding.poi_id)
    return Cue(box=grounding.signage_box, kind=CUE_SIGNAGE, source_poi=grounding.poi_id)
