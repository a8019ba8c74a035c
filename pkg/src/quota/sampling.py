"""Duration-adaptive frame counts and uniform timestamp generation.

Longer videos get more frames, capped by a fixed extra budget:
``T = t_base + min(floor(duration / 3600 * alpha), alpha)``. Timestamps
are interval centers, so neither the first instant nor the final one is
sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

from .errors import NonPositiveDurationError, ZeroFramesError


@dataclass(frozen=True)
class SamplingConfig:
    """Base frame count plus the cap on duration-scaled extra frames."""

    t_base: int = 96
    alpha: int = 64

    def __post_init__(self) -> None:
        if int(self.t_base) < 1:
            raise ValueError(f"t_base must be >= 1, got {self.t_base}")
        if int(self.alpha) < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        object.__setattr__(self, "t_base", int(self.t_base))
        object.__setattr__(self, "alpha", int(self.alpha))


def compute_frame_count(duration_s: float, cfg: SamplingConfig) -> int:
    """Frame count for a video of ``duration_s`` seconds."""
    if not duration_s > 0:
        raise NonPositiveDurationError(f"duration must be > 0, got {duration_s}")
    extra = min(math.floor(duration_s * cfg.alpha / 3600.0), cfg.alpha)
    return cfg.t_base + extra


def sample_timestamps(duration_s: float, frame_count: int) -> List[float]:
    """Uniform timestamps at interval centers: (i + 0.5) * duration / T."""
    if not duration_s > 0:
        raise NonPositiveDurationError(f"duration must be > 0, got {duration_s}")
    if frame_count < 1:
        raise ZeroFramesError(f"frame count must be >= 1, got {frame_count}")
    step = duration_s / frame_count
    return [(i + 0.5) * step for i in range(frame_count)]
