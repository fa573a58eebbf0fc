from cap_discrepancy.config_manager import core


import json
import shutil
import tempfile
from pathlib import Path

import pytest

from cap_discrepancy.config_manager.core import (
    CONFIG_FILENAME,
    THREADS_ENV_VAR,
    ConfigurationError,
    ConfigurationManager,
    resolve_thread_count,
)


class TestConfigurationManager:
    """Test suite for ConfigurationManager with comprehensive coverage."""

    @pytest.fixture
    def temp_dir(self):
        """Create a temporary directory for testing configuration files."""
        temp_dir = tempfile.mkdtemp()
        yield Path(temp_dir)
        shutil.rmtree(temp_dir)

    @pytest.fixture
    def config_manager(self, temp_dir):
        """Create ConfigurationManager with temporary directory."""
        return ConfigurationManager(config_dir=temp_dir)

    def test_initialization_with_string(self, temp_dir):
        manager = ConfigurationManager(config_dir=str(temp_dir))
        assert manager.config_dir == temp_dir
        assert manager.config_dir.exists()

    def test_default_file_is_created(self, config_manager, temp_dir):
        settings = config_manager.load_settings()
        assert (temp_dir / CONFIG_FILENAME).exists()
        assert settings["enumeration"]["gamma_tol"] == 1e-10
        assert settings["enumeration"]["threads"] is None
        assert settings["oracle"]["grid_resolution"] == 1e-3
        assert settings["experiment"]["budget_seconds"] == 600.0
        assert settings["experiment"]["seconds_per_subset"] == 1e-5

    def test_partial_file_is_merged_over_defaults(self, config_manager, temp_dir):
        (temp_dir / CONFIG_FILENAME).write_text(
            json.dumps({"enumeration": {"rank_tol": 1e-8}}), encoding="utf-8"
        )
        section = config_manager.section("enumeration")
        assert section["rank_tol"] == 1e-8
        assert section["gamma_tol"] == 1e-10

    def test_settings_are_copies(self, config_manager):
        config_manager.section("enumeration")["gamma_tol"] = 5.0
        assert config_manager.section("enumeration")["gamma_tol"] == 1e-10

    def test_unknown_section(self, config_manager):
        with pytest.raises(ConfigurationError) as exc_info:
            config_manager.section("hotkeys")
        assert "enumeration" in exc_info.value.context["available"]

    def test_invalid_json(self, config_manager, temp_dir):
        (temp_dir / CONFIG_FILENAME).write_text("{ not json", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="Invalid JSON"):
            config_manager.load_settings()

    @pytest.mark.parametrize("content", [[], {}])
    def test_invalid_structure(self, config_manager, temp_dir, content):
        (temp_dir / CONFIG_FILENAME).write_text(json.dumps(content), encoding="utf-8")
        with pytest.raises(ConfigurationError):
            config_manager.load_settings()

    def test_negative_tolerance(self, config_manager, temp_dir):
        (temp_dir / CONFIG_FILENAME).write_text(
            json.dumps({"enumeration": {"gamma_tol": -1}}), encoding="utf-8"
        )
        with pytest.raises(ConfigurationError):
            config_manager.load_settings()

    def test_cache_and_clear(self, config_manager, temp_dir):
        config_manager.load_settings()
        (temp_dir / CONFIG_FILENAME).write_text(
            json.dumps({"logging": {"level": "DEBUG"}}), encoding="utf-8"
        )
        assert config_manager.section("logging")["level"] == "INFO"
        config_manager.clear_cache()
        assert config_manager.section("logging")["level"] == "DEBUG"

    def test_status(self, config_manager):
        config_manager.load_settings()
        status = config_manager.get_config_status()
        assert status["files"][CONFIG_FILENAME] is True
        assert status["cache_status"]["settings_cached"] is True


class TestResolveThreadCount:
    """Flag, then environment, then config file, then hardware."""

    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert resolve_thread_count(2, 5) == 2

    def test_environment_before_config(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert resolve_thread_count(None, 5) == 3

    def test_config_before_hardware(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        assert resolve_thread_count(None, 5) == 5

    def test_hardware_fallback(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        monkeypatch.setattr(core.os, "cpu_count", lambda: 6)
        assert resolve_thread_count(None, None) == 6

    @pytest.mark.parametrize("value", ["zero", "0", "-2"])
    def test_invalid_environment(self, monkeypatch, value):
        monkeypatch.setenv(THREADS_ENV_VAR, value)
        with pytest.raises(ConfigurationError) as exc_info:
            resolve_thread_count(None)
        assert exc_info.value.context["source"] == THREADS_ENV_VAR
