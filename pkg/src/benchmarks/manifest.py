"""Benchmark manifest schema and validation.

Each bundled benchmark lives in its own directory with a benchmark.yaml
describing it and an assembly source (program.s by default).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

MANIFEST_FILENAME = "benchmark.yaml"


@dataclass
class BenchmarkManifest:
    """Benchmark manifest loaded from benchmark.yaml.

    Attributes:
        name: Unique benchmark identifier (alphanumeric, underscores, hyphens)
        version: Version string
        description: Human-readable description
        enabled: Whether the benchmark is part of default runs
        source: Assembly source file, relative to the benchmark directory
        max_cycles: Cycle budget for one run (None = preset default)
        tags: Free-form labels ("branchy", "memory", ...)
        priority: Ordering key (higher runs first)
        expected_console: Console output the program must produce
        expected_retired: Retired instructions, excluding the halt
    """

    name: str
    version: str = "0.0.0"
    description: str = ""
    enabled: bool = True
    source: str = "program.s"
    max_cycles: Optional[int] = None
    tags: list[str] = field(default_factory=list)
    priority: int = 0
    expected_console: Optional[str] = None
    expected_retired: Optional[int] = None

    @classmethod
    def from_yaml(cls, path: Path) -> BenchmarkManifest:
        """Load a manifest from a YAML file.

        Raises:
            ManifestValidationError: If the file is missing, unparsable or invalid
        """
        if not path.exists():
            raise ManifestValidationError(f"Manifest file not found: {path}")

        try:
            with open(path) as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ManifestValidationError(f"Invalid YAML in {path}: {e}") from e

        if not isinstance(data, dict):
            raise ManifestValidationError(f"Manifest must be a YAML mapping: {path}")

        return cls.from_dict(data, path)

    @classmethod
    def from_dict(cls, data: dict[str, Any], source: Optional[Path] = None) -> BenchmarkManifest:
        """Create a manifest from a dictionary.

        Args:
            data: Dictionary with manifest data
            source: Optional source file path for error messages

        Raises:
            ManifestValidationError: If required fields are missing or invalid
        """
        errors: list[str] = []

        name = data.get("name")
        if not name:
            errors.append("Missing required field: 'name'")
        elif not isinstance(name, str):
            errors.append("Field 'name' must be a string")
        elif not _is_valid_name(name):
            errors.append(
                f"Invalid benchmark name '{name}': must start with a letter and use "
                "letters, digits, underscores and hyphens only"
            )
        _raise_if(errors, source)

        version = data.get("version", "0.0.0")
        if not isinstance(version, str):
            errors.append("Field 'version' must be a string")

        description = data.get("description", "")
        if not isinstance(description, str):
            errors.append("Field 'description' must be a string")

        enabled = data.get("enabled", True)
        if not isinstance(enabled, bool):
            errors.append("Field 'enabled' must be a boolean")

        src = data.get("source", "program.s")
        if not isinstance(src, str) or not src:
            errors.append("Field 'source' must be a non-empty string")

        max_cycles = data.get("max_cycles")
        if max_cycles is not None and (
            isinstance(max_cycles, bool) or not isinstance(max_cycles, int) or max_cycles <= 0
        ):
            errors.append("Field 'max_cycles' must be a positive integer")

        tags = _ensure_string_list(data.get("tags", []), "tags", errors)

        priority = data.get("priority", 0)
        if isinstance(priority, bool) or not isinstance(priority, int):
            errors.append("Field 'priority' must be an integer")

        expected_console = data.get("expected_console")
        if expected_console is not None and not isinstance(expected_console, str):
            errors.append("Field 'expected_console' must be a string")

        expected_retired = data.get("expected_retired")
        if expected_retired is not None and (
            isinstance(expected_retired, bool)
            or not isinstance(expected_retired, int)
            or expected_retired < 0
        ):
            errors.append("Field 'expected_retired' must be a non-negative integer")

        _raise_if(errors, source)

        return cls(
            name=name,
            version=version,
            description=description,
            enabled=enabled,
            source=src,
            max_cycles=max_cycles,
            tags=tags,
            priority=priority,
            expected_console=expected_console,
            expected_retired=expected_retired,
        )

    def has_tag(self, tag: str) -> bool:
        return tag in self.tags

    def to_dict(self) -> dict[str, Any]:
        """Convert to a dictionary (optional fields left unset are omitted)."""
        data: dict[str, Any] = {
            "name": self.name,
            "version": self.version,
            "description": self.description,
            "enabled": self.enabled,
            "source": self.source,
            "tags": list(self.tags),
            "priority": self.priority,
        }
        if self.max_cycles is not None:
            data["max_cycles"] = self.max_cycles
        if self.expected_console is not None:
            data["expected_console"] = self.expected_console
        if self.expected_retired is not None:
            data["expected_retired"] = self.expected_retired
        return data

    def to_yaml(self, path: Path) -> None:
        """Save the manifest to a YAML file."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            yaml.safe_dump(self.to_dict(), f, default_flow_style=False, sort_keys=False)


def _raise_if(errors: list[str], source: Optional[Path]) -> None:
    if errors:
        source_str = f" in {source}" if source else ""
        raise ManifestValidationError(
            f"Invalid manifest{source_str}:\n" + "\n".join(f"  - {e}" for e in errors)
        )


def _is_valid_name(name: str) -> bool:
    """Letters, digits, underscores and hyphens, starting with a letter."""
    if not name or not name[0].isalpha():
        return False
    return all(c.isalnum() or c in "_-" for c in name)


def _ensure_string_list(value: Any, field_name: str, errors: list[str]) -> list[str]:
    if value is None:
        return []
    if not isinstance(value, list):
        errors.append(f"Field '{field_name}' must be a list")
        return []
    if not all(isinstance(item, str) for item in value):
        errors.append(f"Field '{field_name}' must contain only strings")
        return []
    return list(value)


class ManifestValidationError(Exception):
    """Raised when a benchmark manifest fails validation."""

    pass


__all__ = [
    "MANIFEST_FILENAME",
    "BenchmarkManifest",
    "ManifestValidationError",
]
