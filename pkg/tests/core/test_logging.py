"""Tests for the logging configuration system."""

import logging
import logging.handlers
import os
import tempfile
from pathlib import Path
from unittest.mock import patch

from src.core.logging_config import ComponentLogAdapter, get_logger, set_log_level, setup_logging


def flush_root() -> None:
    for handler in logging.getLogger().handlers:
        handler.flush()


def close_root() -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler) or type(handler) is logging.StreamHandler:
            root.removeHandler(handler)
            handler.close()


class TestSetupLogging:
    """Test logging setup functionality."""

    def teardown_method(self) -> None:
        """Release the log files."""
        close_root()

    def test_log_files_created(self) -> None:
        """Test both log files are created in a new directory."""
        with tempfile.TemporaryDirectory() as tmpdir:
            logs = Path(tmpdir) / "logs"
            setup_logging(logs)
            assert (logs / "verbose.log").exists()
            assert (logs / "error.log").exists()
            close_root()

    def test_levels_split_between_files(self) -> None:
        """Test DEBUG reaches verbose.log only at DEBUG level and warnings reach error.log."""
        with tempfile.TemporaryDirectory() as tmpdir:
            setup_logging(tmpdir, log_level="DEBUG")
            logger = logging.getLogger("rvsim.test")
            logger.debug("debug line")
            logger.info("info line")
            logger.warning("warning line")
            flush_root()

            verbose = (Path(tmpdir) / "verbose.log").read_text()
            errors = (Path(tmpdir) / "error.log").read_text()
            assert "debug line" in verbose and "warning line" in verbose
            assert "info line" not in errors
            assert "[WARNING] warning line" in errors
            close_root()

    def test_info_level_filters_debug(self) -> None:
        """Test the default level drops DEBUG."""
        with tempfile.TemporaryDirectory() as tmpdir:
            setup_logging(tmpdir)
            logging.getLogger("rvsim.test").debug("hidden")
            flush_root()
            assert "hidden" not in (Path(tmpdir) / "verbose.log").read_text()
            close_root()

    def test_repeat_setup_replaces_handlers(self) -> None:
        """Test calling setup twice does not duplicate handlers."""
        with tempfile.TemporaryDirectory() as tmpdir:
            setup_logging(tmpdir)
            setup_logging(tmpdir, console_output=True)
            handlers = logging.getLogger().handlers
            assert len(handlers) == 3
            close_root()

    def test_debug_env_var(self) -> None:
        """Test RVSIM_DEBUG forces DEBUG and a console handler."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with patch.dict(os.environ, {"RVSIM_DEBUG": "1"}):
                setup_logging(tmpdir, log_level="ERROR")
            handlers = logging.getLogger().handlers
            assert any(
                type(h) is logging.StreamHandler and h.level == logging.DEBUG for h in handlers
            )
            close_root()


class TestComponentLogger:
    """Test component attribution."""

    def teardown_method(self) -> None:
        """Release the log files."""
        close_root()

    def test_prefix(self) -> None:
        """Test messages carry the component prefix."""
        logger = get_logger("rvsim.pipeline", component="pipeline")
        assert isinstance(logger, ComponentLogAdapter)
        msg, _ = logger.process("Halted at cycle 9", {})
        assert msg == "[pipeline] Halted at cycle 9"

    def test_default_component(self) -> None:
        """Test the default component is core."""
        msg, _ = get_logger("rvsim.x").process("hello", {})
        assert msg == "[core] hello"

    def test_written_with_prefix(self) -> None:
        """Test the prefix reaches the file."""
        with tempfile.TemporaryDirectory() as tmpdir:
            setup_logging(tmpdir)
            get_logger("rvsim.lockstep", component="lockstep").warning("Divergence at 3")
            flush_root()
            assert "[lockstep] Divergence at 3" in (Path(tmpdir) / "error.log").read_text()
            close_root()


class TestSetLogLevel:
    """Test changing levels at runtime."""

    def teardown_method(self) -> None:
        """Release the log files."""
        close_root()

    def test_error_log_stays_at_warning(self) -> None:
        """Test set_log_level leaves error.log alone."""
        with tempfile.TemporaryDirectory() as tmpdir:
            setup_logging(tmpdir, console_output=True)
            set_log_level("DEBUG")
            levels = {}
            for handler in logging.getLogger().handlers:
                if isinstance(handler, logging.handlers.RotatingFileHandler):
                    levels[Path(handler.baseFilename).name] = handler.level
                else:
                    levels["console"] = handler.level
            assert levels == {
                "verbose.log": logging.DEBUG,
                "error.log": logging.WARNING,
                "console": logging.DEBUG,
            }
            close_root()
