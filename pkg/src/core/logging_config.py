"""Logging configuration with component attribution.

Two rotating log files (verbose and errors) plus an optional stderr
mirror. Messages from the simulator's parts carry a `[component]`
prefix through ComponentLogAdapter.
"""

from __future__ import annotations

import logging
import logging.handlers
import os
import sys
from pathlib import Path
from typing import Any

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class ComponentLogAdapter(logging.LoggerAdapter):
    """Logger adapter prefixing messages with the simulator component.

    Format: [timestamp] [level] [component] message
    """

    def process(self, msg: str, kwargs: Any) -> tuple[str, Any]:
        component = (self.extra or {}).get("component", "core")
        return f"[{component}] {msg}", kwargs


def setup_logging(
    logs_dir: str | Path,
    log_level: str = "INFO",
    max_bytes: int = 10 * 1024 * 1024,
    backup_count: int = 3,
    console_output: bool = False,
) -> None:
    """Set up logging.

    Creates two log files:
    - verbose.log: everything at log_level and above (DEBUG by default
      when RVSIM_DEBUG is set)
    - error.log: WARNING and above

    Args:
        logs_dir: Directory for log files
        log_level: Minimum level for verbose.log and the console
        max_bytes: Maximum log file size before rotation
        backup_count: Number of rotated files to keep
        console_output: Also log to stderr
    """
    logs_path = Path(logs_dir)
    logs_path.mkdir(parents=True, exist_ok=True)

    if os.environ.get("RVSIM_DEBUG"):
        log_level = "DEBUG"
        console_output = True

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    log_format = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
    level = getattr(logging, log_level.upper())

    verbose_handler = logging.handlers.RotatingFileHandler(
        logs_path / "verbose.log",
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding="utf-8",
    )
    verbose_handler.setLevel(level)
    verbose_handler.setFormatter(log_format)
    root_logger.addHandler(verbose_handler)

    error_handler = logging.handlers.RotatingFileHandler(
        logs_path / "error.log",
        maxBytes=max_bytes,
        backupCount=backup_count,
        encoding="utf-8",
    )
    error_handler.setLevel(logging.WARNING)
    error_handler.setFormatter(log_format)
    root_logger.addHandler(error_handler)

    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(log_format)
        root_logger.addHandler(console_handler)

    root_logger.debug(f"Logging initialized in {logs_path}")


def get_logger(name: str, component: str = "core") -> ComponentLogAdapter:
    """Get a logger with component attribution.

    Example:
        logger = get_logger(__name__, component="pipeline")
        logger.info("Halted at cycle 42")  # [pipeline] Halted at cycle 42
    """
    return ComponentLogAdapter(logging.getLogger(name), {"component": component})


def set_log_level(level: str) -> None:
    """Change the level of the verbose log and console handlers.

    The error log stays at WARNING.
    """
    root_logger = logging.getLogger()
    new_level = getattr(logging, level.upper())

    for handler in root_logger.handlers:
        if isinstance(handler, logging.handlers.RotatingFileHandler):
            if handler.baseFilename.endswith("verbose.log"):
                handler.setLevel(new_level)
        else:
            handler.setLevel(new_level)


__all__ = [
    "LOG_FORMAT",
    "setup_logging",
    "get_logger",
    "set_log_level",
    "ComponentLogAdapter",
]
