"""Command-line interface for rvsim."""

from rvsim.cli.main import main

__all__ = ["main"]
