"""Service configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ShimConfig:
    """Which model backend to serve, where, and on what device.

    ``backend`` accepts ``tiny[:seed]`` (self-contained deterministic
    network, no downloads) or ``hf:<model-id>`` (a vision-language model
    loaded through transformers).
    """

    backend: str = "tiny"
    port: int = 8070
    device: str = "cpu"

    def __post_init__(self) -> None:
        if not (1 <= int(self.port) <= 65535):
            raise ValueError(f"port out of range: {self.port}")
        if not self.backend:
            raise ValueError("backend must be non-empty")
