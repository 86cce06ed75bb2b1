"""Benchmark corpus discovery.

Scans a directory for benchmark subdirectories (those holding a
benchmark.yaml), validates their manifests and assembles their sources
on first use. A broken benchmark is recorded with its error and
discovery carries on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from src.benchmarks.manifest import MANIFEST_FILENAME, BenchmarkManifest, ManifestValidationError
from src.core.asm import AssemblerError, Program, assemble_file

logger = logging.getLogger(__name__)

DEFAULT_BENCH_DIR = Path(__file__).resolve().parent.parent / "benchmarks"


class CorpusError(Exception):
    """Raised when a benchmark cannot be found or built."""

    def __init__(self, message: str, name: Optional[str] = None) -> None:
        super().__init__(message)
        self.name = name


@dataclass
class BenchmarkInfo:
    """A discovered benchmark.

    Attributes:
        path: Benchmark directory
        manifest: Validated manifest
        program: Assembled program (None until built)
        load_error: Error raised while building, if any
    """

    path: Path
    manifest: BenchmarkManifest
    program: Optional[Program] = None
    load_error: Optional[Exception] = None

    @property
    def name(self) -> str:
        return self.manifest.name

    @property
    def source_path(self) -> Path:
        return self.path / self.manifest.source

    @property
    def is_enabled(self) -> bool:
        return self.manifest.enabled


class Corpus:
    """The set of benchmarks under one directory.

    Example:
        corpus = Corpus()
        for info in corpus.list_benchmarks(tag="branchy"):
            program = corpus.program(info.name)
    """

    def __init__(self, bench_dir: Optional[Path] = None) -> None:
        self.bench_dir = Path(bench_dir) if bench_dir is not None else DEFAULT_BENCH_DIR
        self._benchmarks: dict[str, BenchmarkInfo] = {}
        self.errors: dict[Path, Exception] = {}
        self._discovered = False

    def discover(self) -> list[BenchmarkInfo]:
        """Scan bench_dir for benchmark directories.

        Invalid manifests and duplicate names are recorded in `errors`.

        Returns:
            Discovered benchmarks ordered by priority (descending), then name
        """
        self._benchmarks.clear()
        self.errors.clear()
        self._discovered = True

        if not self.bench_dir.is_dir():
            logger.warning(f"Benchmark directory does not exist: {self.bench_dir}")
            return []

        for path in sorted(self.bench_dir.iterdir()):
            manifest_path = path / MANIFEST_FILENAME
            if not path.is_dir() or not manifest_path.exists():
                continue
            try:
                manifest = BenchmarkManifest.from_yaml(manifest_path)
            except ManifestValidationError as e:
                logger.error(f"Invalid manifest in {path}: {e}")
                self.errors[path] = e
                continue
            if manifest.name in self._benchmarks:
                err = CorpusError(f"Duplicate benchmark name '{manifest.name}'", manifest.name)
                logger.error(f"{err} in {path}")
                self.errors[path] = err
                continue
            self._benchmarks[manifest.name] = BenchmarkInfo(path, manifest)
            logger.debug(f"Discovered benchmark: {manifest.name}")

        return self._ordered(self._benchmarks.values())

    @staticmethod
    def _ordered(infos: Iterable[BenchmarkInfo]) -> list[BenchmarkInfo]:
        return sorted(infos, key=lambda i: (-i.manifest.priority, i.name))

    def _ensure(self) -> None:
        if not self._discovered:
            self.discover()

    def list_benchmarks(
        self, *, enabled_only: bool = True, tag: Optional[str] = None
    ) -> list[BenchmarkInfo]:
        """Benchmarks in run order, optionally filtered."""
        self._ensure()
        infos = [
            info
            for info in self._benchmarks.values()
            if (info.is_enabled or not enabled_only) and (tag is None or info.manifest.has_tag(tag))
        ]
        return self._ordered(infos)

    def names(self, *, enabled_only: bool = True, tag: Optional[str] = None) -> list[str]:
        return [i.name for i in self.list_benchmarks(enabled_only=enabled_only, tag=tag)]

    def get(self, name: str) -> BenchmarkInfo:
        """Look up a benchmark by name.

        Raises:
            CorpusError: If no benchmark has that name
        """
        self._ensure()
        try:
            return self._benchmarks[name]
        except KeyError:
            known = ", ".join(sorted(self._benchmarks)) or "none"
            raise CorpusError(f"Unknown benchmark '{name}' (known: {known})", name) from None

    def program(self, name: str) -> Program:
        """Assembled program of a benchmark, built on first request.

        Raises:
            CorpusError: Unknown benchmark, missing source or assembly error
        """
        info = self.get(name)
        if info.program is not None:
            return info.program
        if info.load_error is not None:
            raise CorpusError(f"Benchmark '{name}' failed to build: {info.load_error}", name)
        try:
            info.program = assemble_file(info.source_path)
        except (OSError, AssemblerError) as e:
            info.load_error = e
            logger.error(f"Failed to build benchmark {name}: {e}")
            raise CorpusError(f"Benchmark '{name}' failed to build: {e}", name) from e
        logger.debug(f"Assembled {name}: {len(info.program.text.words)} words")
        return info.program

    def build_all(self) -> dict[str, Exception]:
        """Assemble every enabled benchmark, returning the failures by name."""
        failures: dict[str, Exception] = {}
        for info in self.list_benchmarks():
            try:
                self.program(info.name)
            except CorpusError as e:
                failures[info.name] = e
        return failures

    def __contains__(self, name: str) -> bool:
        self._ensure()
        return name in self._benchmarks

    def __len__(self) -> int:
        self._ensure()
        return len(self._benchmarks)


__all__ = [
    "DEFAULT_BENCH_DIR",
    "CorpusError",
    "BenchmarkInfo",
    "Corpus",
]
