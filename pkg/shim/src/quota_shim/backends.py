"""Model backends: map (prompt, optional image) to option-letter logits.

The score endpoint needs one number: how strongly the model prefers
answering "A" over "B". Raw vocabulary probabilities are not comparable
across models, so every backend reports the two option-letter logits and
the service renormalizes them against each other:
``p_a = P(A) / (P(A) + P(B))``.
"""

from __future__ import annotations

import hashlib
import math
from typing import Optional, Tuple

import numpy as np


class BackendNotReady(RuntimeError):
    """Raised when the configured model cannot serve requests."""


def renormalize_pair(logit_a: float, logit_b: float) -> float:
    """P(A) / (P(A) + P(B)) from the two option logits, always in [0, 1]."""
    # equivalent to softmax over the pair, computed stably
    if logit_a >= logit_b:
        return 1.0 / (1.0 + math.exp(logit_b - logit_a))
    return math.exp(logit_a - logit_b) / (1.0 + math.exp(logit_a - logit_b))


def _hash_features(seed: int, prompt: str, image: Optional[bytes],
                   width: int) -> np.ndarray:
    hasher = hashlib.sha256(f"{seed}|{prompt}".encode("utf-8"))
    if image:
        hasher.update(image)
    raw = b""
    digest = hasher.digest()
    while len(raw) < width:
        raw += digest
        digest = hashlib.sha256(digest).digest()
    bytes_arr = np.frombuffer(raw[:width], dtype=np.uint8)
    return bytes_arr.astype(np.float64) / 127.5 - 1.0


class TinyBackend:
    """Self-contained seeded two-layer network over hashed inputs.

    Keeps the full scoring path (features -> logits -> pair
    renormalization) runnable offline and deterministically; it stands in
    for a real model, it does not understand anything.
    """

    FEATURES = 64
    HIDDEN = 32
    _VOCAB = (
        "frame video shows a the scene with near light motion object "
        "person room street table view detail moment"
    ).split()

    def __init__(self, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.seed = seed
        scale = 1.0 / math.sqrt(self.FEATURES)
        self.w1 = rng.normal(0.0, scale, (self.FEATURES, self.HIDDEN))
        self.b1 = rng.normal(0.0, 0.1, self.HIDDEN)
        self.w2 = rng.normal(0.0, 0.3, (self.HIDDEN, 2))
        self.b2 = rng.normal(0.0, 0.1, 2)

    def option_logits(self, prompt: str,
                      image: Optional[bytes]) -> Tuple[float, float]:
        x = _hash_features(self.seed, prompt, image, self.FEATURES)
        hidden = np.tanh(x @ self.w1 + self.b1)
        logits = hidden @ self.w2 + self.b2
        return float(logits[0]), float(logits[1])

    def generate(self, prompt: str) -> str:
        digest = hashlib.sha256(f"{self.seed}|gen|{prompt}".encode()).digest()
        words = [self._VOCAB[b % len(self._VOCAB)] for b in digest[:6]]
        return " ".join(words) + "."


class HFBackend:
    """Vision-language model served through transformers.

    ``model_id`` is any hub or local checkpoint whose processor accepts
    text plus an optional image (the reference setup is a small
    2B-parameter vision-language model). Loading is lazy; failures surface
    as BackendNotReady so the service can answer 503.
    """

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.device = device
        self._model = None
        self._processor = None
        self._tokenizer = None
        self._load_error: Optional[Exception] = None

    def _ensure_loaded(self) -> None:
        if self._model is not None:
            return
        if self._load_error is not None:
            raise BackendNotReady(str(self._load_error))
        try:
            import torch  # noqa: F401
            from transformers import AutoConfig, AutoProcessor

            self._processor = AutoProcessor.from_pretrained(self.model_id)
            config = AutoConfig.from_pretrained(self.model_id)
            self._model = self._load_model(config)
            self._model.to(self.device)
            self._model.eval()
            self._tokenizer = getattr(
                self._processor, "tokenizer", self._processor
            )
        except Exception as exc:
            self._load_error = exc
            raise BackendNotReady(f"cannot load {self.model_id}: {exc}") from exc

    def _load_model(self, config):
        from transformers import (
            AutoModelForCausalLM,
            AutoModelForVision2Seq,
        )

        try:
            return AutoModelForVision2Seq.from_pretrained(self.model_id)
        except Exception:
            return AutoModelForCausalLM.from_pretrained(self.model_id)

    def _letter_ids(self, letter: str):
        ids = []
        for variant in (letter, f" {letter}"):
            encoded = self._tokenizer.encode(variant, add_special_tokens=False)
            if len(encoded) == 1:
                ids.append(encoded[0])
        return ids or self._tokenizer.encode(letter, add_special_tokens=False)[:1]

    def _inputs(self, prompt: str, image: Optional[bytes]):
        if image is not None:
            import io

            from PIL import Image

            pil = Image.open(io.BytesIO(image)).convert("RGB")
            return self._processor(
                text=prompt, images=pil, return_tensors="pt"
            ).to(self.device)
        return self._processor(text=prompt, return_tensors="pt").to(self.device)

    def option_logits(self, prompt: str,
                      image: Optional[bytes]) -> Tuple[float, float]:
        self._ensure_loaded()
        import torch

        with torch.no_grad():
            logits = self._model(**self._inputs(prompt, image)).logits[0, -1]
        # several single-token spellings may exist per letter; keep the
        # strongest so tokenizer quirks do not bias the pair
        logit_a = max(float(logits[i]) for i in self._letter_ids("A"))
        logit_b = max(float(logits[i]) for i in self._letter_ids("B"))
        return logit_a, logit_b

    def generate(self, prompt: str) -> str:
        self._ensure_loaded()
        import torch

        inputs = self._inputs(prompt, None)
        with torch.no_grad():
            output = self._model.generate(
                **inputs, max_new_tokens=256, do_sample=False
            )
        prompt_len = inputs["input_ids"].shape[1]
        return self._tokenizer.decode(
            output[0][prompt_len:], skip_special_tokens=True
        ).strip()


def make_backend(spec: str, device: str = "cpu"):
    """Build a backend from its config string."""
    if spec == "tiny" or spec.startswith("tiny:"):
        seed = int(spec[5:]) if spec.startswith("tiny:") else 0
        return TinyBackend(seed)
    if spec.startswith("hf:"):
        return HFBackend(spec[3:], device=device)
    # bare identifiers are treated as hub model ids
    return HFBackend(spec, device=device)
