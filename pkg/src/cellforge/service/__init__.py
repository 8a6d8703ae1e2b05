"""HTTP service wrapping the core package; the CLI shares its handlers."""

from .app import app

__all__ = ["app"]
