"""
Unified Logger Component - structured logging for every brick.

This component configures structlog once per process and hands out
bound loggers keyed by module name.
"""

from .core import configure_logging, get_logger, is_configured

__all__ = [
    "configure_logging",
    "get_logger",
    "is_configured",
]
