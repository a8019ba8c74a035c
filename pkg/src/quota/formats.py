"""Bit-exact file formats.

Embeddings travel in a small binary container ("QTEM"): magic, u32
version, u32 frame count, then per frame u32 height/width/dim followed by
height*width*dim little-endian float32 values, row-major. Scores and
allocation reports are JSON, kept deterministic so identical runs produce
identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import List, Union

import numpy as np

from .errors import (
    BadMagicError,
    MalformedJsonError,
    NonNumericScoreError,
    TruncatedFileError,
    VersionUnsupportedError,
)
from .model import FrameEmbedding, ScoreVector, VideoEmbeddings, validate

MAGIC = b"QTEM"
VERSION = 1

PathLike = Union[str, Path]


def write_embeddings(video: VideoEmbeddings, path: PathLike) -> None:
    """Serialize frames; merge-size counters are bookkeeping and not stored."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(video.frames)))
        for frame in video.frames:
            fh.write(struct.pack("<III", frame.height, frame.width, frame.dim))
            fh.write(np.ascontiguousarray(frame.data, dtype="<f4").tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise TruncatedFileError(
            f"expected {n} bytes for {what}, got {len(buf)}"
        )
    return buf


def read_embeddings(path: PathLike) -> VideoEmbeddings:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
        version, count = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != VERSION:
            raise VersionUnsupportedError(f"unsupported version {version}")
        frames: List[FrameEmbedding] = []
        for i in range(count):
            h, w, c = struct.unpack(
                "<III", _read_exact(fh, 12, f"frame {i} header")
            )
            raw = _read_exact(fh, h * w * c * 4, f"frame {i} data")
            data = np.frombuffer(raw, dtype="<f4").reshape(h, w, c)
            frames.append(FrameEmbedding(data))
    video = VideoEmbeddings(tuple(frames))
    validate(video)
    return video


def read_scores(path: PathLike) -> ScoreVector:
    """Read a JSON number array into a ScoreVector."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"{path}: {exc}") from exc
    if not isinstance(payload, list):
        raise MalformedJsonError(f"{path}: expected a JSON array")
    scores = []
    for i, value in enumerate(payload):
        # bool is an int subclass; it is not a score.
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise NonNumericScoreError(f"score {i} is not a number: {value!r}")
        scores.append(float(value))
    return ScoreVector(tuple(scores))


def write_report(report: dict, path: PathLike) -> None:
    """Write an allocation report with stable, reproducible formatting."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=False, allow_nan=False)
        fh.write("\n")
