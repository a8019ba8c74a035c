"""HTTP service implementing the scoring wire protocol.

POST /score    {"prompt": str, "frame_id": str, "image_b64"?: str}
               -> {"p_a": number in [0, 1]}
POST /generate {"prompt": str} -> {"text": str}

Handlers are stateless between requests; model access is serialized behind
a lock, so responses never depend on arrival order. Malformed bodies
answer 400, an unloadable backend answers 503.
"""

from __future__ import annotations

import base64
import binascii
import threading
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .backends import BackendNotReady, make_backend, renormalize_pair
from .config import ShimConfig


class ScoreRequest(BaseModel):
    prompt: str = Field(min_length=1)
    frame_id: str = Field(min_length=1)
    image_b64: Optional[str] = None


class GenerateRequest(BaseModel):
    prompt: str = Field(min_length=1)


def create_app(config: ShimConfig, backend=None) -> FastAPI:
    app = FastAPI(title="scoring shim", version="0.1.0")
    backend = backend if backend is not None else make_backend(
        config.backend, device=config.device
    )
    lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"error": "malformed body", "detail": exc.errors()},
        )

    @app.exception_handler(BackendNotReady)
    async def model_not_ready(request: Request, exc: BackendNotReady):
        return JSONResponse(
            status_code=503,
            content={"error": "model-not-ready", "detail": str(exc)},
        )

    @app.post("/score")
    def score(body: ScoreRequest):
        image = None
        if body.image_b64 is not None:
            try:
                image = base64.b64decode(body.image_b64, validate=True)
            except (binascii.Error, ValueError):
                return JSONResponse(
                    status_code=400,
                    content={"error": "malformed body",
                             "detail": "image_b64 is not valid base64"},
                )
        with lock:
            logit_a, logit_b = backend.option_logits(body.prompt, image)
        return {"p_a": renormalize_pair(logit_a, logit_b)}

    @app.post("/generate")
    def generate(body: GenerateRequest):
        with lock:
            text = backend.generate(body.prompt)
        return {"text": text}

    return app


def serve(config: ShimConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
