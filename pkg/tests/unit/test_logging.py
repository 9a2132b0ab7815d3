"""
Unit tests for structured logging setup.
"""

import json

import structlog

from src.core.integrator import Integrator, init_state
from src.observability.logging import configure_default_logging, configure_logging, get_logger


class TestConfigureLogging:
    """Test renderer and level selection."""

    def test_json_lines_on_stderr(self, capsys):
        """Test JSON output carries the event and its context."""
        # Arrange
        configure_logging("INFO", json_output=True)

        # Act
        get_logger("test").info("run_started", run="cube", steps=4)

        # Assert
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["event"] == "run_started"
        assert record["run"] == "cube"
        assert record["steps"] == 4
        assert record["level"] == "info"

    def test_level_filters_debug(self, capsys):
        """Test debug events are dropped at INFO."""
        configure_logging("INFO", json_output=True)
        get_logger("test").debug("step_done", step=1)
        assert capsys.readouterr().err == ""

    def test_follows_replaced_stderr(self, capsys):
        """Test output goes to the stderr current at log time."""
        configure_logging("DEBUG", json_output=True)
        capsys.readouterr()
        structlog.get_logger("test").debug("after_swap")
        assert "after_swap" in capsys.readouterr().err


class TestDefaultLogging:
    """Test library logging when the CLI has not configured anything."""

    def test_debug_is_filtered_and_info_goes_to_stderr(self, capsys):
        """Test the import-time default drops debug and keeps stdout clean."""
        # Arrange
        structlog.reset_defaults()
        configure_default_logging()

        # Act
        get_logger("test").debug("step_complete", step=1)
        get_logger("test").info("run_started", run="cube")

        # Assert
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "step_complete" not in captured.err
        assert "run_started" in captured.err

    def test_existing_configuration_is_kept(self, capsys):
        """Test the default does not override a configured level."""
        configure_logging("DEBUG", json_output=True)
        configure_default_logging()
        get_logger("test").debug("kept")
        assert "kept" in capsys.readouterr().err

    def test_integrator_step_is_silent(self, capsys, coupled_assemblies, step_params, unit_cube):
        """Test a time step logs nothing at the default level."""
        # Arrange
        structlog.reset_defaults()
        configure_default_logging()

        # Act
        Integrator(coupled_assemblies, step_params).step(init_state(unit_cube, (0.0, 0.0, 1.0)))

        # Assert
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "step_complete" not in captured.err
