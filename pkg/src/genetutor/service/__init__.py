"""HTTP session service binding the tracer, mastery and adjacency modules."""

from .app import create_app
from .config import ServiceConfig

__all__ = ["create_app", "ServiceConfig"]
