from cap_discrepancy.unified_logger import core


import json

import pytest

from cap_discrepancy.unified_logger.core import configure_logging, get_logger, is_configured


class TestUnifiedLogger:
    """structlog configuration and bound loggers."""

    @pytest.fixture(autouse=True)
    def reset(self):
        yield
        configure_logging("WARNING")

    def test_get_logger_configures_on_first_use(self):
        logger = get_logger("cap_discrepancy.test")
        assert is_configured()
        assert hasattr(logger, "info")

    def test_json_output(self, capsys):
        configure_logging("INFO", json_output=True)
        get_logger("cap_discrepancy.json").info("enumeration finished", delta=0.5)
        line = capsys.readouterr().err.strip().splitlines()[-1]
        record = json.loads(line)
        assert record["event"] == "enumeration finished"
        assert record["delta"] == 0.5
        assert record["level"] == "info"
        assert record["logger_name"] == "cap_discrepancy.json"

    def test_level_filters_debug(self, capsys):
        configure_logging("INFO", json_output=True)
        get_logger("cap_discrepancy.filter").debug("hidden")
        assert "hidden" not in capsys.readouterr().err

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            configure_logging("LOUD")

    def test_module_state(self):
        configure_logging("DEBUG")
        assert core.is_configured()
