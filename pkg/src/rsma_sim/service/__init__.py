"""HTTP service around the sweep engine."""

from .app import create_app

__all__ = ["create_app"]
