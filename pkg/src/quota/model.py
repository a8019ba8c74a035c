"""Shared domain types.

All containers are immutable after construction (frozen dataclasses, numpy
buffers flipped read-only) and therefore safe to share across threads.
Token grids are stored row-major with the width axis fastest; element type
is float32, while kernels accumulate in float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyVideoError,
    NegativeScoreError,
    NonFiniteValueError,
)

DTYPE = np.float32

STRATEGY_DIRECT = "direct"
STRATEGY_ENTITY = "entity-list"
STRATEGY_EVENT = "event-question"
STRATEGIES = (STRATEGY_DIRECT, STRATEGY_ENTITY, STRATEGY_EVENT)

WEIGHT_SUM_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrameEmbedding:
    """One frame's token grid: height x width tokens of ``dim`` channels.

    ``sizes`` counts how many original tokens each grid cell represents;
    it is populated by the merging assigner and absent otherwise.
    """

    data: np.ndarray
    sizes: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=DTYPE)
        if data.ndim != 3:
            raise DimensionMismatchError(
                f"frame data must be (height, width, dim), got shape {data.shape}"
            )
        h, w, c = data.shape
        if h < 1 or w < 1 or c < 1:
            raise DimensionMismatchError(f"frame dims must be >= 1, got {data.shape}")
        if not np.isfinite(data).all():
            raise NonFiniteValueError("frame data contains non-finite values")
        object.__setattr__(self, "data", _freeze(data))
        if self.sizes is not None:
            sizes = np.asarray(self.sizes, dtype=np.int64)
            if sizes.shape != (h, w):
                raise DimensionMismatchError(
                    f"sizes shape {sizes.shape} does not match grid ({h}, {w})"
                )
            if (sizes < 1).any():
                raise DimensionMismatchError("every token size must be >= 1")
            object.__setattr__(self, "sizes", _freeze(sizes))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    @property
    def token_count(self) -> int:
        return self.height * self.width

    @classmethod
    def from_flat(cls, height: int, width: int, dim: int,
                  values: Sequence[float]) -> "FrameEmbedding":
        """Build from a flat row-major value list (width fastest)."""
        arr = np.asarray(values, dtype=DTYPE)
        if arr.size != height * width * dim:
            raise DimensionMismatchError(
                f"expected {height * width * dim} values, got {arr.size}"
            )
        return cls(arr.reshape(height, width, dim))


@dataclass(frozen=True)
class VideoEmbeddings:
    """Ordered frame grids sharing one channel count.

    Spatial dims are uniform on encoder output and may vary after reduction,
    so only the channel count is enforced here.
    """

    frames: Tuple[FrameEmbedding, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        validate(self)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def dim(self) -> int:
        return self.frames[0].dim

    @property
    def total_tokens(self) -> int:
        return sum(f.token_count for f in self.frames)

    def uniform_grid(self) -> Tuple[int, int]:
        """Return the common (height, width), or raise if frames disagree."""
        dims = {(f.height, f.width) for f in self.frames}
        if len(dims) != 1:
            raise DimensionMismatchError(
                f"frames have non-uniform grids: {sorted(dims)}"
            )
        return next(iter(dims))


def validate(video: VideoEmbeddings) -> None:
    """Re-check every type invariant; raises a typed error on violation.

    Idempotent: constructors call this, and deserializers may call it again.
    """
    if not video.frames:
        raise EmptyVideoError("video has no frames")
    dim = video.frames[0].dim
    for i, frame in enumerate(video.frames):
        if not isinstance(frame, FrameEmbedding):
            raise DimensionMismatchError(f"frame {i} is not a FrameEmbedding")
        if frame.dim != dim:
            raise DimensionMismatchError(
                f"frame {i} has dim {frame.dim}, expected {dim}"
            )
        if not np.isfinite(frame.data).all():
            raise NonFiniteValueError(f"frame {i} contains non-finite values")


@dataclass(frozen=True)
class ScoreVector:
    """Raw per-frame relevance scores; finite and non-negative."""

    scores: Tuple[float, ...]

    def __post_init__(self) -> None:
        scores = tuple(float(s) for s in self.scores)
        for i, s in enumerate(scores):
            if not np.isfinite(s):
                raise NonFiniteValueError(f"score {i} is not finite")
            if s < 0:
                raise NegativeScoreError(f"score {i} is negative: {s}")
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class NormalizedScores:
    """Per-frame allocation weights in [0, 1] summing to 1."""

    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.weights)
        for i, w in enumerate(weights):
            if not (0.0 <= w <= 1.0):
                raise ValueError(f"weight {i} out of [0, 1]: {w}")
        total = float(np.sum(np.asarray(weights, dtype=np.float64)))
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"weights sum to {total!r}, expected 1 within {WEIGHT_SUM_TOL}"
            )
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class DecoupledQuery:
    """Outcome of query decoupling: object list, frame-level question, or as-is."""

    strategy: str
    source_query: str
    object_list: Optional[Tuple[str, ...]] = None
    event_question: Optional[str] = None
    fallback: bool = False

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.object_list is not None:
            object.__setattr__(self, "object_list", tuple(self.object_list))
        if self.strategy == STRATEGY_ENTITY and not self.object_list:
            raise ValueError("entity-list strategy requires a non-empty object_list")
        if self.strategy == STRATEGY_EVENT and not self.event_question:
            raise ValueError("event-question strategy requires event_question")
        if self.strategy == STRATEGY_DIRECT:
            if self.object_list is not None or self.event_question is not None:
                raise ValueError("direct strategy carries no decoupled payload")

    @classmethod
    def direct(cls, query: str, fallback: bool = False) -> "DecoupledQuery":
        return cls(strategy=STRATEGY_DIRECT, source_query=query, fallback=fallback)


@dataclass(frozen=True)
class AllocationPlan:
    """Integer token targets and solved grid dims per frame, under one budget."""

    budget: int
    targets: Tuple[int, ...]
    grids: Tuple[Tuple[int, int], ...]

    def __post_init__(self) -> None:
        budget = int(self.budget)
        if budget < 1:
            raise ValueError(f"budget must be positive, got {budget}")
        targets = tuple(int(n) for n in self.targets)
        grids = tuple((int(h), int(w)) for h, w in self.grids)
        if len(targets) != len(grids):
            raise ValueError("targets and grids must have equal length")
        used = 0
        for i, ((h, w), n) in enumerate(zip(grids, targets)):
            if h < 1 or w < 1:
                raise ValueError(f"grid {i} has non-positive dims ({h}, {w})")
            if h * w > max(n, 1):
                raise ValueError(
                    f"grid {i} holds {h * w} tokens, above its target {n}"
                )
            used += h * w
        if used > budget:
            raise ValueError(f"plan uses {used} tokens, above budget {budget}")
        object.__setattr__(self, "budget", budget)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "grids", grids)

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def used(self) -> int:
        return sum(h * w for h, w in self.grids)


@dataclass(frozen=True)
class ReducedVideoEmbeddings:
    """Per-frame reduced grids plus the assigner that produced them."""

    frames: Tuple[FrameEmbedding, ...]
    provenance: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise EmptyVideoError("reduced video has no frames")
        dim = self.frames[0].dim
        for i, frame in enumerate(self.frames):
            if frame.dim != dim:
                raise DimensionMismatchError(
                    f"reduced frame {i} has dim {frame.dim}, expected {dim}"
                )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def total_tokens(self) -> int:
        return sum(f.token_count for f in self.frames)

    def as_video(self) -> VideoEmbeddings:
        return VideoEmbeddings(self.frames)
