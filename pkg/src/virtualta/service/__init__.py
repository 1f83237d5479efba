"""Service layer: HTTP API, persistence, and webhook delivery."""

from .app import create_app
from .storage import Storage

__all__ = ["Storage", "create_app"]
