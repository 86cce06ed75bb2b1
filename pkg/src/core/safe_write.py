"""Atomic writes for simulator output files.

Commit logs, traces and reports are written to a temporary file in the
target directory and moved into place with os.replace, so a reader (or a
later diff-logs run) never sees a half-written file, even when a run is
interrupted or faults midway.
"""

from __future__ import annotations

import logging
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, TextIO

logger = logging.getLogger(__name__)


class SafeWriteError(Exception):
    """Raised when an output file cannot be written."""

    def __init__(self, message: str, path: Path | None = None) -> None:
        super().__init__(message)
        self.path = path


@contextmanager
def atomic_writer(filepath: str | Path, *, encoding: str = "utf-8") -> Iterator[TextIO]:
    """Open a text stream whose content replaces filepath on clean exit.

    If the block raises, the temporary file is removed and the target is
    left untouched.

    Raises:
        SafeWriteError: If the temporary file cannot be created or moved

    Example:
        with atomic_writer("run.trace") as f:
            f.write("# cycle IF ID EX MA WB bmis stall btkn\\n")
    """
    path = Path(filepath)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, temp_path = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as e:
        raise SafeWriteError(f"Cannot write {path}: {e}", path=path) from e

    try:
        with os.fdopen(fd, "w", encoding=encoding, newline="\n") as f:
            yield f
            f.flush()
            os.fsync(f.fileno())
        os.replace(temp_path, path)
    except BaseException as e:
        try:
            os.remove(temp_path)
        except OSError:
            pass
        if isinstance(e, OSError):
            raise SafeWriteError(f"Cannot write {path}: {e}", path=path) from e
        raise

    logger.debug(f"Wrote {path}")


def safe_write(filepath: str | Path, content: str, *, encoding: str = "utf-8") -> Path:
    """Atomically replace filepath with content.

    Returns:
        The written path

    Raises:
        SafeWriteError: If the write fails
    """
    path = Path(filepath)
    with atomic_writer(path, encoding=encoding) as f:
        f.write(content)
    return path


def safe_write_lines(filepath: str | Path, lines: Iterable[str]) -> Path:
    """Atomically write one line per item (each terminated by a newline)."""
    path = Path(filepath)
    with atomic_writer(path) as f:
        for line in lines:
            f.write(line)
            f.write("\n")
    return path


__all__ = [
    "SafeWriteError",
    "atomic_writer",
    "safe_write",
    "safe_write_lines",
]
