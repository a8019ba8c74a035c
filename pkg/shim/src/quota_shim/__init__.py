"""Reference scoring service for the visual token budgeting wire protocol."""

from .app import create_app, serve
from .backends import HFBackend, TinyBackend, make_backend, renormalize_pair
from .config import ShimConfig

__all__ = [
    "HFBackend",
    "ShimConfig",
    "TinyBackend",
    "create_app",
    "make_backend",
    "renormalize_pair",
    "serve",
]
