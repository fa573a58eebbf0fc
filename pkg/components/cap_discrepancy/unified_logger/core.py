"""
Core logging setup for the unified_logger component.

All bricks obtain their logger through ``get_logger(__name__)``. Output goes
to stderr so that machine-readable results on stdout stay clean.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

import structlog

_LEVELS: dict[str, int] = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}

_configured = False


def _stderr_logger(*_args: Any) -> structlog.PrintLogger:
    # Looked up per call: test runners and the CLI runner swap sys.stderr.
    return structlog.PrintLogger(file=sys.stderr)


def configure_logging(level: str = "INFO", json_output: bool = False) -> None:
    """Configure structlog for the current process.

    Args:
        level: Minimum level name (DEBUG, INFO, WARNING, ERROR)
        json_output: Render events as JSON lines instead of key=value pairs

    Raises:
        ValueError: If the level name is unknown
    """
    global _configured

    try:
        numeric_level = _LEVELS[level.upper()]
    except KeyError as e:
        raise ValueError(f"Unknown log level: {level!r}") from e

    renderer: Any = (
        structlog.processors.JSONRenderer()
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )
    _configured = True


def is_configured() -> bool:
    """Return True once configure_logging has run in this process."""
    return _configured


def get_logger(name: str) -> Any:
    """Get a structlog logger bound to a module name.

    Falls back to a WARNING-level configuration when nothing configured
    logging yet, so library use stays quiet by default. The returned proxy
    resolves the configuration on every call, so module-level loggers pick
    up a later configure_logging.
    """
    if not _configured:
        configure_logging("WARNING")
    return structlog.get_logger(logger_name=name)
