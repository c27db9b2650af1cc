"""HTTP service and the command handlers it shares with the CLI."""

from . import handlers
from .app import app, create_app

__all__ = ["app", "create_app", "handlers"]
