"""
Configuration Manager Component - settings for enumeration, oracle and experiments.

This component provides centralized configuration management with JSON
file support, caching, validation and environment fallbacks.
"""

from .core import (
    THREADS_ENV_VAR,
    ConfigDict,
    ConfigurationError,
    ConfigurationManager,
    resolve_thread_count,
)

__all__ = [
    "THREADS_ENV_VAR",
    "ConfigDict",
    "ConfigurationError",
    "ConfigurationManager",
    "resolve_thread_count",
]
