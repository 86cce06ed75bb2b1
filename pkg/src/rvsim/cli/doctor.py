"""Doctor module - environment health check for rvsim.

Checks the Python runtime and libraries, the home directory, the bundled
benchmark corpus and a short datapath equivalence sweep, and reports
each with a status marker.
"""

from __future__ import annotations

import importlib
import platform
import shutil
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional

import click
import psutil


class Status(Enum):
    """Health check status indicators."""

    OK = "✓"
    WARNING = "⚠"
    ERROR = "✗"
    INFO = "ℹ"


@dataclass
class CheckResult:
    """Result of a single health check."""

    name: str
    status: Status
    message: str
    details: Optional[str] = None


def check_python_version() -> CheckResult:
    """Check if Python version is 3.10+."""
    version = platform.python_version()
    major, minor = (int(p) for p in version.split(".")[:2])
    if (major, minor) >= (3, 10):
        return CheckResult(name="Python", status=Status.OK, message=version)
    return CheckResult(
        name="Python", status=Status.ERROR, message=version, details="Python 3.10+ required"
    )


def check_library(module: str, purpose: str) -> CheckResult:
    """Check that a required library imports, reporting its version."""
    try:
        mod = importlib.import_module(module)
    except ImportError:
        return CheckResult(
            name=module,
            status=Status.ERROR,
            message="Not installed",
            details=f"Required for {purpose}. Install with: pip install -e .",
        )
    version = getattr(mod, "__version__", None) or "installed"
    return CheckResult(name=module, status=Status.OK, message=str(version))


def check_cpu() -> CheckResult:
    """Report the worker count `rvsim bench` uses by default."""
    physical = psutil.cpu_count(logical=False)
    logical = psutil.cpu_count()
    if not physical:
        return CheckResult(
            name="CPU cores",
            status=Status.WARNING,
            message=f"{logical or '?'} logical",
            details="Physical core count unavailable; bench runs on 1 worker unless --jobs is set",
        )
    return CheckResult(
        name="CPU cores", status=Status.OK, message=f"{physical} physical, {logical} logical"
    )


def check_disk_space(home: Path) -> CheckResult:
    """Check free space where traces and logs are written (traces can be large)."""
    try:
        where = home if home.exists() else Path.home()
        free_gb = shutil.disk_usage(where).free / (1024**3)
    except OSError as e:
        return CheckResult(
            name="Disk space", status=Status.WARNING, message="Unknown", details=str(e)
        )
    if free_gb >= 1:
        return CheckResult(name="Disk space", status=Status.OK, message=f"{free_gb:.1f}GB free")
    return CheckResult(
        name="Disk space",
        status=Status.WARNING,
        message=f"{free_gb:.1f}GB free",
        details="Cycle traces of long runs need several hundred MB",
    )


def check_write_permissions(home: Path) -> CheckResult:
    """Check that the home directory is writable."""
    try:
        home.mkdir(parents=True, exist_ok=True)
        test_file = home / ".write_test"
        test_file.write_text("test")
        test_file.unlink()
        return CheckResult(name="Home directory", status=Status.OK, message=str(home))
    except OSError as e:
        return CheckResult(
            name="Home directory", status=Status.ERROR, message="Not writable", details=str(e)
        )


def check_config(home: Path) -> CheckResult:
    """Check that config.yaml loads and its default preset is valid."""
    from src.core.config import Config, ConfigError

    try:
        config = Config(home)
        sim = config.sim_config()
    except ConfigError as e:
        return CheckResult(
            name="Configuration", status=Status.ERROR, message="Invalid", details=str(e)
        )
    return CheckResult(name="Configuration", status=Status.OK, message=f"default preset {sim.name}")


def check_corpus(bench_dir: Optional[Path] = None) -> CheckResult:
    """Check that every bundled benchmark has a valid manifest and assembles."""
    from src.core.corpus import Corpus

    corpus = Corpus(bench_dir)
    infos = corpus.discover()
    failures = corpus.build_all()
    problems = [f"{path.name}: {e}" for path, e in corpus.errors.items()]
    problems += [f"{name}: {e}" for name, e in failures.items()]
    if not infos and not problems:
        return CheckResult(
            name="Benchmark corpus",
            status=Status.ERROR,
            message="Empty",
            details=f"No benchmarks found in {corpus.bench_dir}",
        )
    if problems:
        return CheckResult(
            name="Benchmark corpus",
            status=Status.ERROR,
            message=f"{len(problems)} broken",
            details="; ".join(problems),
        )
    return CheckResult(
        name="Benchmark corpus", status=Status.OK, message=f"{len(infos)} benchmarks"
    )


def check_datapath() -> CheckResult:
    """Check every preset's forms are registered, then run a short mux/one-hot sweep."""
    from src.core.config import PRESETS
    from src.core.datapath import sweep_alu_equivalence, sweep_extend_equivalence
    from src.core.variants import has_variant

    needed = {
        name
        for sim in PRESETS.values()
        for name in (
            f"alu.{sim.alu_impl}", f"extend.{sim.extend_impl}", f"forward.{sim.forward_impl}"
        )
    }
    missing = sorted(name for name in needed if not has_variant(name))
    if missing:
        return CheckResult(
            name="Datapath forms",
            status=Status.ERROR,
            message=f"{len(missing)} preset form(s) not registered",
            details=", ".join(missing),
        )

    alu = sweep_alu_equivalence(samples=10_000)
    extend = sweep_extend_equivalence()
    if alu.ok and extend.ok:
        return CheckResult(
            name="Datapath forms",
            status=Status.OK,
            message=f"{alu.checked + extend.checked} checks equivalent",
        )
    bad = alu.mismatches + extend.mismatches
    return CheckResult(
        name="Datapath forms",
        status=Status.ERROR,
        message=f"{len(bad)} mismatch(es)",
        details=", ".join(m[0] for m in bad),
    )


def run_health_check(home: Path) -> list[CheckResult]:
    """Run all health checks.

    Args:
        home: rvsim home directory

    Returns:
        List of check results.
    """
    results = [
        check_python_version(),
        check_library("numpy", "datapath sweeps"),
        check_library("yaml", "configuration and manifests"),
        check_library("blinker", "simulation events"),
        check_library("psutil", "parallel benchmark runs"),
        check_cpu(),
        check_disk_space(home),
        check_write_permissions(home),
    ]
    if results[-1].status is Status.OK:
        results.append(check_config(home))
    results.append(check_corpus())
    results.append(check_datapath())
    return results


def print_results(results: list[CheckResult]) -> None:
    """Print health check results."""
    click.echo()
    click.echo("rvsim Health Check")
    click.echo("==================")
    click.echo()

    for result in results:
        click.echo(f"{result.status.value} {result.name}: {result.message}")
        if result.details:
            click.echo(f"    {result.details}")

    click.echo()
    errors = sum(1 for r in results if r.status == Status.ERROR)
    warnings = sum(1 for r in results if r.status == Status.WARNING)
    if errors == 0 and warnings == 0:
        click.echo("Status: Ready")
    elif errors == 0:
        click.echo(f"Status: Ready with {warnings} warning(s) ⚠")
    else:
        click.echo(f"Status: {errors} error(s), {warnings} warning(s) - needs attention ✗")
    click.echo()


def check_dependencies(home: Path) -> bool:
    """Main entry point for the doctor command.

    Returns:
        True if no check reported an error.
    """
    results = run_health_check(home)
    print_results(results)
    return not any(r.status == Status.ERROR for r in results)


__all__ = [
    "Status",
    "CheckResult",
    "check_python_version",
    "check_library",
    "check_cpu",
    "check_disk_space",
    "check_write_permissions",
    "check_config",
    "check_corpus",
    "check_datapath",
    "run_health_check",
    "print_results",
    "check_dependencies",
]
