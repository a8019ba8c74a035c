"""Shared fixtures: deterministic grids and a stub scoring service."""

from __future__ import annotations

import json
import random
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from quota.model import FrameEmbedding, VideoEmbeddings


def make_frame(h, w, c, seed=0, integer=False):
    rng = np.random.default_rng(seed)
    if integer:
        data = rng.integers(-4, 5, size=(h, w, c)).astype(np.float32)
    else:
        data = rng.standard_normal((h, w, c)).astype(np.float32)
    return FrameEmbedding(data)


def make_video(frames, h, w, c, seed=0, integer=False):
    return VideoEmbeddings(tuple(
        make_frame(h, w, c, seed=seed + i, integer=integer)
        for i in range(frames)
    ))


class StubScoringService:
    """In-process HTTP service speaking the scorer wire protocol.

    ``score_fn(frame_id, prompt)`` supplies p_a; ``generate_fn(prompt)``
    supplies /generate text. Requests are logged, and an optional random
    delay shuffles completion order to exercise concurrent clients.
    """

    def __init__(self, score_fn=None, generate_fn=None, max_delay_s=0.0,
                 fail_first=0):
        self.score_fn = score_fn or (lambda frame_id, prompt: 0.5)
        self.generate_fn = generate_fn or (lambda prompt: "NO_DECOUPLE")
        self.max_delay_s = max_delay_s
        self.requests = []
        self._fail_remaining = fail_first
        self._lock = threading.Lock()

        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def _reply(self, code, payload):
                body = json.dumps(payload).encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with service._lock:
                    service.requests.append((self.path, body))
                    if service._fail_remaining > 0:
                        service._fail_remaining -= 1
                        self._reply(503, {"error": "warming up"})
                        return
                if service.max_delay_s:
                    time.sleep(random.random() * service.max_delay_s)
                if self.path == "/score":
                    p_a = service.score_fn(body.get("frame_id", ""),
                                           body.get("prompt", ""))
                    self._reply(200, {"p_a": p_a})
                elif self.path == "/generate":
                    self._reply(200, {"text": service.generate_fn(
                        body.get("prompt", ""))})
                else:
                    self._reply(404, {"error": "no such route"})

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_port}"
        self.thread = threading.Thread(
            target=self.server.serve_forever, daemon=True
        )

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def stub_service():
    """Factory for stub scoring services; shuts them all down afterwards."""
    started = []

    def _start(**kwargs):
        service = StubScoringService(**kwargs)
        service.__enter__()
        started.append(service)
        return service

    yield _start
    for service in started:
        service.__exit__()
