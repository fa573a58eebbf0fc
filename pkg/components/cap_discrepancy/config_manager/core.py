"""
Core configuration management for the config_manager component.

This module provides a JSON-based settings file with caching, validation
and the thread-count resolution chain (flag, environment, file, hardware).
"""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict

# Type alias for configuration dictionaries
ConfigDict = Dict[str, Any]

CONFIG_FILENAME = "capdisc_config.json"
THREADS_ENV_VAR = "CAPDISC_THREADS"


class ConfigurationError(Exception):
    """Exception raised for configuration-related errors."""

    def __init__(self, message: str, context: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.context = context or {}


class ConfigurationManager:
    """
    Configuration manager with caching and validation.

    Settings are grouped into sections (enumeration, oracle, experiment,
    logging); missing keys in a user file fall back to the defaults.
    """

    def __init__(self, config_dir: Path | str | None = None) -> None:
        """Initialize the configuration manager.

        Args:
            config_dir: Directory containing configuration files
        """
        if config_dir is None:
            config_dir = Path("config")
        elif isinstance(config_dir, str):
            config_dir = Path(config_dir)

        self.config_dir = config_dir
        self.config_dir.mkdir(parents=True, exist_ok=True)

        self._settings: ConfigDict | None = None

    def load_settings(self) -> ConfigDict:
        """Load and cache the settings file merged over the defaults.

        Returns:
            Deep copy of the merged settings

        Raises:
            ConfigurationError: If loading or validation fails
        """
        if self._settings is None:
            loaded = self._load_json_file(CONFIG_FILENAME, default_content=self.default_settings())
            self._settings = _merge(self.default_settings(), loaded)
        return copy.deepcopy(self._settings)

    def section(self, name: str) -> ConfigDict:
        """Return one settings section.

        Raises:
            ConfigurationError: If the section does not exist
        """
        settings = self.load_settings()
        try:
            return settings[name]
        except KeyError as e:
            raise ConfigurationError(
                f"Unknown configuration section: {name}",
                {"section": name, "available": sorted(settings)},
            ) from e

    def _load_json_file(self, filename: str, default_content: ConfigDict | None = None) -> ConfigDict:
        """Load JSON configuration file with error handling.

        Creates the file from ``default_content`` when it does not exist.
        """
        file_path = self.config_dir / filename

        try:
            if file_path.exists():
                with open(file_path, "r", encoding="utf-8") as f:
                    content = json.load(f)
                    self.validate_config(content, filename)
                    return content
            if default_content is not None:
                self._save_json_file(filename, default_content)
                return copy.deepcopy(default_content)
            raise ConfigurationError(
                f"Configuration file not found: {filename}",
                {"file_path": str(file_path), "config_dir": str(self.config_dir)},
            )

        except ConfigurationError:
            raise
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Invalid JSON in {filename}: {e}",
                {"file_path": str(file_path), "json_error": str(e)},
            ) from e
        except Exception as e:
            raise ConfigurationError(
                f"Failed to load {filename}: {e}",
                {"file_path": str(file_path), "error_type": type(e).__name__},
            ) from e

    def _save_json_file(self, filename: str, content: ConfigDict) -> None:
        """Save JSON configuration file."""
        file_path = self.config_dir / filename

        try:
            with open(file_path, "w", encoding="utf-8") as f:
                json.dump(content, f, indent=2, ensure_ascii=False)
        except Exception as e:
            raise ConfigurationError(
                f"Failed to save {filename}: {e}",
                {"file_path": str(file_path), "error_type": type(e).__name__},
            ) from e

    def validate_config(self, config: ConfigDict, filename: str) -> bool:
        """Validate configuration content.

        Raises:
            ConfigurationError: If validation fails
        """
        if not isinstance(config, dict):
            raise ConfigurationError(
                f"Invalid configuration format in {filename}: expected dict, got {type(config).__name__}",
                {"config_type": type(config).__name__},
            )

        if not config:
            raise ConfigurationError(f"Empty configuration in {filename}", {"filename": filename})

        enumeration = config.get("enumeration", {})
        for key in ("gamma_tol", "rank_tol", "boundary_tol"):
            value = enumeration.get(key)
            if value is not None and (not isinstance(value, (int, float)) or value < 0):
                raise ConfigurationError(
                    f"enumeration.{key} must be a non-negative number in {filename}",
                    {"key": key, "value": value},
                )

        return True

    def clear_cache(self) -> None:
        """Clear cached settings to force reload."""
        self._settings = None

    def get_config_status(self) -> dict[str, Any]:
        """Get status information about the configuration file."""
        return {
            "config_dir": str(self.config_dir),
            "config_dir_exists": self.config_dir.exists(),
            "files": {CONFIG_FILENAME: (self.config_dir / CONFIG_FILENAME).exists()},
            "cache_status": {"settings_cached": self._settings is not None},
        }

    @staticmethod
    def default_settings() -> ConfigDict:
        """Get default settings."""
        return {
            "version": "1.0",
            "enumeration": {
                "gamma_tol": 1e-10,
                "rank_tol": 1e-10,
                "boundary_tol": 1e-12,
                "threads": None,
                "debug_check": False,
            },
            "oracle": {
                "grid_resolution": 1e-3,
                "tolerance_per_resolution": 5.0,
            },
            "experiment": {
                "budget_seconds": 600.0,
                "seconds_per_subset": 1e-5,
                "desk_scale_subsets": 2e8,
            },
            "logging": {
                "level": "INFO",
                "json": False,
            },
        }


def _merge(base: ConfigDict, override: ConfigDict) -> ConfigDict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def resolve_thread_count(flag: int | None, configured: int | None = None) -> int:
    """Resolve the worker count: flag, then CAPDISC_THREADS, then config, then hardware.

    Raises:
        ConfigurationError: If a provided value is not a positive integer
    """
    if flag is not None:
        candidate: Any = flag
        source = "flag"
    elif os.environ.get(THREADS_ENV_VAR):
        candidate = os.environ[THREADS_ENV_VAR]
        source = THREADS_ENV_VAR
    elif configured is not None:
        candidate = configured
        source = "config"
    else:
        return os.cpu_count() or 1

    try:
        count = int(candidate)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(
            f"Thread count from {source} is not an integer: {candidate!r}",
            {"source": source, "value": candidate},
        ) from e
    if count < 1:
        raise ConfigurationError(
            f"Thread count from {source} must be >= 1, got {count}",
            {"source": source, "value": count},
        )
    return count
