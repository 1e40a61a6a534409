"""HTTP facade for the interactive seed/segment/inspect loop."""

from .app import create_app

__all__ = ["create_app"]
