"""Per-frame relevance scoring behind pluggable backends.

A scorer maps (frame refs, binary-choice prompt) to one probability-of-"A"
per frame. Three bindings exist: a seeded hash mock for fixtures, a JSON
passthrough file, and a remote HTTP service speaking the wire protocol
below. Remote requests may run concurrently; results are reassembled by
request index, so output never depends on completion order.

Wire protocol (JSON over HTTP):
    POST /score     {"prompt": str, "frame_id": str, "image_b64"?: str}
                    -> {"p_a": number in [0, 1]}
    POST /generate  {"prompt": str} -> {"text": str}
"""

from __future__ import annotations

import base64
import hashlib
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import requests

from .errors import (
    NegativeScoreError,
    OutOfRangeScoreError,
    ScoreCountMismatchError,
    ScorerUnreachableError,
)
from .formats import read_scores
from .model import NormalizedScores, ScoreVector
from .prompts import NO_DECOUPLE

KIND_MOCK = "mock"
KIND_FILE = "file"
KIND_REMOTE = "remote"


@dataclass(frozen=True)
class ScorerBinding:
    """Which scorer to use and its kind-specific parameter.

    ``max_in_flight`` caps concurrent remote requests; the other kinds
    ignore it.
    """

    kind: str
    seed: int = 0
    path: Optional[str] = None
    endpoint: Optional[str] = None
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.kind not in (KIND_MOCK, KIND_FILE, KIND_REMOTE):
            raise ValueError(f"unknown scorer kind {self.kind!r}")
        if self.kind == KIND_FILE and not self.path:
            raise ValueError("file scorer needs a path")
        if self.kind == KIND_REMOTE and not self.endpoint:
            raise ValueError("remote scorer needs an endpoint")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


def parse_scorer_spec(spec: str, max_in_flight: int = 4) -> ScorerBinding:
    """Parse a CLI scorer spec: mock[:seed] | file:PATH | http[s]:URL."""
    if spec == KIND_MOCK:
        return ScorerBinding(kind=KIND_MOCK, max_in_flight=max_in_flight)
    if spec.startswith("mock:"):
        return ScorerBinding(kind=KIND_MOCK, seed=int(spec[5:]),
                             max_in_flight=max_in_flight)
    if spec.startswith("file:"):
        return ScorerBinding(kind=KIND_FILE, path=spec[5:],
                             max_in_flight=max_in_flight)
    if spec.startswith(("http:", "https:")):
        # "http:URL" and a bare "http://host:port" both denote an endpoint.
        url = spec.split(":", 1)[1] if not spec.startswith(("http://", "https://")) else spec
        return ScorerBinding(kind=KIND_REMOTE, endpoint=url,
                             max_in_flight=max_in_flight)
    raise ValueError(f"unrecognized scorer spec {spec!r}")


class MockScorer:
    """Seeded hash of (frame ref, prompt) mapped into [0, 1).

    Content-derived frame refs make the mock permutation-invariant and give
    identical frames identical scores, with no model in the loop.
    """

    supports_generate = True

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    def score(self, frame_refs: Sequence[str], prompt: str,
              images: Optional[Sequence[Optional[bytes]]] = None) -> List[float]:
        out = []
        for ref in frame_refs:
            digest = hashlib.sha256(
                f"{self.seed}|{ref}|{prompt}".encode("utf-8")
            ).digest()
            out.append(int.from_bytes(digest[:8], "big") / 2.0**64)
        return out

    def generate(self, prompt: str) -> str:
        # No language model is bound, so decoupling is always declined.
        return NO_DECOUPLE


class FileScorer:
    """Passthrough of a JSON number array, one score per frame."""

    supports_generate = False

    def __init__(self, path: str):
        self.path = path

    def score(self, frame_refs: Sequence[str], prompt: str,
              images: Optional[Sequence[Optional[bytes]]] = None) -> List[float]:
        vec = read_scores(self.path)
        return list(vec.scores)

    def generate(self, prompt: str) -> str:
        raise ScorerUnreachableError("file scorer cannot generate text")


class RemoteScorer:
    """HTTP client for the scoring wire protocol.

    Each request is retried with exponential backoff before the scorer is
    declared unreachable. Concurrency is bounded by ``max_in_flight``;
    responses land in a slot per request index.
    """

    supports_generate = True

    def __init__(self, endpoint: str, max_in_flight: int = 4,
                 retries: int = 3, timeout: float = 30.0,
                 backoff_s: float = 0.2):
        self.endpoint = endpoint.rstrip("/")
        self.max_in_flight = max(1, int(max_in_flight))
        self.retries = int(retries)
        self.timeout = float(timeout)
        self.backoff_s = float(backoff_s)

    def _post(self, route: str, payload: dict) -> dict:
        url = f"{self.endpoint}{route}"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff_s * 2 ** (attempt - 1))
            try:
                resp = requests.post(url, json=payload, timeout=self.timeout)
                if resp.status_code >= 500:
                    last_error = ScorerUnreachableError(
                        f"{url} answered {resp.status_code}"
                    )
                    continue
                if resp.status_code != 200:
                    raise ScorerUnreachableError(
                        f"{url} answered {resp.status_code}: {resp.text[:200]}"
                    )
                return resp.json()
            except requests.RequestException as exc:
                last_error = exc
        raise ScorerUnreachableError(
            f"{url} unreachable after {self.retries + 1} attempts: {last_error}"
        )

    def _score_one(self, ref: str, prompt: str,
                   image: Optional[bytes]) -> float:
        payload = {"prompt": prompt, "frame_id": ref}
        if image is not None:
            payload["image_b64"] = base64.b64encode(image).decode("ascii")
        body = self._post("/score", payload)
        try:
            return float(body["p_a"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ScorerUnreachableError(
                f"malformed /score response {body!r}"
            ) from exc

    def score(self, frame_refs: Sequence[str], prompt: str,
              images: Optional[Sequence[Optional[bytes]]] = None) -> List[float]:
        imgs = list(images) if images is not None else [None] * len(frame_refs)
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            futures = [
                pool.submit(self._score_one, ref, prompt, img)
                for ref, img in zip(frame_refs, imgs)
            ]
            return [f.result() for f in futures]

    def generate(self, prompt: str) -> str:
        body = self._post("/generate", {"prompt": prompt})
        try:
            return str(body["text"])
        except (KeyError, TypeError) as exc:
            raise ScorerUnreachableError(
                f"malformed /generate response {body!r}"
            ) from exc


def make_scorer(binding: ScorerBinding):
    if binding.kind == KIND_MOCK:
        return MockScorer(binding.seed)
    if binding.kind == KIND_FILE:
        return FileScorer(binding.path)
    return RemoteScorer(binding.endpoint, max_in_flight=binding.max_in_flight)


def score_frames(frame_refs: Sequence[str], prompt: str,
                 binding: ScorerBinding,
                 images: Optional[Sequence[Optional[bytes]]] = None,
                 scorer=None) -> ScoreVector:
    """Score every frame; one probability-of-"A" per ref, in ref order."""
    if not frame_refs:
        raise ValueError("frame_refs must be non-empty")
    if not prompt:
        raise ValueError("prompt must be non-empty")
    scorer = scorer if scorer is not None else make_scorer(binding)
    raw = scorer.score(frame_refs, prompt, images)
    if len(raw) != len(frame_refs):
        raise ScoreCountMismatchError(
            f"scorer returned {len(raw)} scores for {len(frame_refs)} frames"
        )
    for i, s in enumerate(raw):
        if not np.isfinite(s) or not (0.0 <= s <= 1.0):
            raise OutOfRangeScoreError(f"score {i} out of [0, 1]: {s}")
    return ScoreVector(tuple(float(s) for s in raw))


def normalize_scores(scores: ScoreVector) -> NormalizedScores:
    """Scale scores to allocation weights summing to 1.

    All-zero input degrades to uniform weights: the proportional formula is
    undefined there, and uniform reproduces unweighted allocation.
    """
    values = np.asarray(scores.scores, dtype=np.float64)
    if (values < 0).any():
        raise NegativeScoreError("scores must be non-negative")
    total = float(values.sum())
    if total <= 0.0:
        return NormalizedScores(tuple([1.0 / len(values)] * len(values)))
    return NormalizedScores(tuple((values / total).tolist()))
