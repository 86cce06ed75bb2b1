"""Configuration: simulator presets and the user configuration file.

SimConfig describes one simulated machine (predictor mode, datapath
forms, memory sizes, budgets). The named presets reproduce the four
processor versions plus a no-prediction reference.

Config is the user's persistent configuration, loaded from
`<home>/config.yaml` (home defaults to ~/.rvsim, overridable with the
RVSIM_HOME environment variable) and created with defaults on first run.
"""

from __future__ import annotations

import copy
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Optional

import yaml

PREDICTOR_MODES = ("none", "single", "pipelined")
DATAPATH_FORMS = ("mux", "onehot")
HAZARD_STAGES = ("id", "if")

DEFAULT_HOME = "~/.rvsim"
HOME_ENV_VAR = "RVSIM_HOME"


class ConfigError(Exception):
    """Base exception for configuration errors."""

    pass


def _is_pow2(n: int) -> bool:
    return n > 0 and not n & (n - 1)


@dataclass(frozen=True)
class SimConfig:
    """One simulated machine configuration.

    Attributes:
        name: Preset name, or "custom"
        predictor_mode: "none", "single" or "pipelined"
        alu_impl: ALU form ("mux" or "onehot")
        extend_impl: Load align/extend form ("mux" or "onehot")
        hazard_detect: Stage detecting load-use hazards ("id" or "if")
        forward_impl: Operand bypass variant name
        imem_bytes: Instruction memory size (power of two)
        dmem_bytes: Data memory size (power of two)
        pht_entries: Pattern history table entries (power of two)
        btb_entries: Branch target buffer entries (power of two)
        console_address: Console MMIO byte address
        echo_console: Echo console bytes to stdout
        max_cycles: Cycle budget for one run
        trace: Write a per-cycle trace
    """

    name: str = "custom"
    predictor_mode: str = "single"
    alu_impl: str = "mux"
    extend_impl: str = "mux"
    hazard_detect: str = "id"
    forward_impl: str = "standard"
    imem_bytes: int = 32 * 1024
    dmem_bytes: int = 32 * 1024
    pht_entries: int = 8192
    btb_entries: int = 512
    console_address: int = 0xF0000000
    echo_console: bool = False
    max_cycles: int = 10_000_000
    trace: bool = False

    def validate(self) -> SimConfig:
        """Check every field, returning self.

        Raises:
            ConfigError: On the first invalid field
        """
        if self.predictor_mode not in PREDICTOR_MODES:
            raise ConfigError(
                f"predictor_mode must be one of {PREDICTOR_MODES}, got '{self.predictor_mode}'"
            )
        if self.alu_impl not in DATAPATH_FORMS:
            raise ConfigError(f"alu_impl must be one of {DATAPATH_FORMS}, got '{self.alu_impl}'")
        if self.extend_impl not in DATAPATH_FORMS:
            raise ConfigError(
                f"extend_impl must be one of {DATAPATH_FORMS}, got '{self.extend_impl}'"
            )
        if self.hazard_detect not in HAZARD_STAGES:
            raise ConfigError(
                f"hazard_detect must be one of {HAZARD_STAGES}, got '{self.hazard_detect}'"
            )
        for key in ("imem_bytes", "dmem_bytes", "pht_entries", "btb_entries"):
            value = getattr(self, key)
            if not _is_pow2(value):
                raise ConfigError(f"{key} must be a power of two, got {value}")
        if self.pht_entries < 2 or self.btb_entries < 2:
            raise ConfigError("predictor tables need at least two entries")
        if self.max_cycles <= 0:
            raise ConfigError(f"max_cycles must be positive, got {self.max_cycles}")
        if self.console_address & ~0xFFFFFFFF:
            raise ConfigError(f"console_address {self.console_address:#x} is not a 32-bit address")
        return self

    def with_overrides(self, **overrides: Any) -> SimConfig:
        """Copy with fields replaced (None values are ignored), validated."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(changes) - set(self.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"Unknown SimConfig field(s): {', '.join(sorted(unknown))}")
        return replace(self, **changes).validate()

    @classmethod
    def from_preset(cls, name: str, **overrides: Any) -> SimConfig:
        """Build a config from a named preset.

        Raises:
            ConfigError: Unknown preset or invalid override
        """
        try:
            preset = PRESETS[name]
        except KeyError:
            raise ConfigError(f"Unknown preset '{name}' (known: {', '.join(PRESETS)})") from None
        return preset.with_overrides(**overrides)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


PRESETS: dict[str, SimConfig] = {
    "rvp-simple": SimConfig("rvp-simple", "single", "mux", "mux", "id"),
    "rvp-optalu": SimConfig("rvp-optalu", "single", "onehot", "onehot", "id"),
    "rvp-optif": SimConfig("rvp-optif", "pipelined", "mux", "mux", "if"),
    "rvp-optall": SimConfig("rvp-optall", "pipelined", "onehot", "onehot", "if"),
    "rvp-nobp": SimConfig("rvp-nobp", "none", "mux", "mux", "id"),
}

# The four processor versions, in report order
PROCESSOR_PRESETS = ("rvp-simple", "rvp-optalu", "rvp-optif", "rvp-optall")


def resolve_home(home: Optional[str | Path] = None) -> Path:
    """Home directory: explicit argument, then RVSIM_HOME, then ~/.rvsim."""
    return Path(home or os.environ.get(HOME_ENV_VAR) or DEFAULT_HOME).expanduser()


class Config:
    """User configuration stored as YAML in the home directory.

    Example:
        config = Config()
        preset = config.get("simulator.preset", "rvp-simple")
        config.set("bench.jobs", 4)
        config.save()
    """

    DEFAULT_CONFIG: dict[str, Any] = {
        "simulator": {
            "preset": "rvp-simple",
            "max_cycles": 10_000_000,
            "imem_bytes": 32 * 1024,
            "dmem_bytes": 32 * 1024,
            "console_address": 0xF0000000,
            "echo_console": False,
            "trace": False,
        },
        "predictor": {"pht_entries": 8192, "btb_entries": 512},
        "logging": {"level": "INFO", "max_size_mb": 10, "backup_count": 3},
        "paths": {"logs_dir": "logs", "traces_dir": "traces"},
        "bench": {"jobs": 0},
    }

    def __init__(self, home: Optional[str | Path] = None) -> None:
        """Initialize configuration.

        Args:
            home: Override the home directory (default: RVSIM_HOME or ~/.rvsim)

        Raises:
            ConfigError: If the home directory or config file is unusable
        """
        self._home = resolve_home(home)
        self._config_file = self._home / "config.yaml"
        self._data: dict[str, Any] = {}

        try:
            self._home.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"Cannot create home directory {self._home}: {e}") from e

        self._load()

    @property
    def home(self) -> Path:
        return self._home

    @property
    def config_file(self) -> Path:
        return self._config_file

    def _dir(self, key: str) -> Path:
        path = Path(self.get(f"paths.{key}")).expanduser()
        if not path.is_absolute():
            path = self._home / path
        path.mkdir(parents=True, exist_ok=True)
        return path

    @property
    def logs_dir(self) -> Path:
        return self._dir("logs_dir")

    @property
    def traces_dir(self) -> Path:
        return self._dir("traces_dir")

    def _load(self) -> None:
        self._data = copy.deepcopy(self.DEFAULT_CONFIG)

        if self._config_file.exists():
            try:
                with open(self._config_file, "r") as f:
                    user_config = yaml.safe_load(f) or {}
            except (OSError, yaml.YAMLError) as e:
                raise ConfigError(f"Failed to load config from {self._config_file}: {e}") from e
            if not isinstance(user_config, dict):
                raise ConfigError(f"{self._config_file} must contain a mapping")
            self._merge_config(self._data, user_config)
        else:
            self.save()

    def _merge_config(self, base: dict[str, Any], override: dict[str, Any]) -> None:
        """Recursively merge override into base."""
        for key, value in override.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._merge_config(base[key], value)
            else:
                base[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        """Get a value by dot path.

        Example:
            config.get("predictor.pht_entries")  # 8192
            config.get("missing.key", "default")  # "default"
        """
        value: Any = self._data
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """Set a value by dot path (in memory; call save() to persist)."""
        keys = key.split(".")
        data = self._data
        for k in keys[:-1]:
            data = data.setdefault(k, {})
        data[keys[-1]] = value

    def save(self) -> None:
        """Write the current configuration to config.yaml."""
        try:
            with open(self._config_file, "w") as f:
                yaml.safe_dump(self._data, f, default_flow_style=False, sort_keys=False)
        except OSError as e:
            raise ConfigError(f"Failed to save config: {e}") from e

    def sim_config(self, preset: Optional[str] = None, **overrides: Any) -> SimConfig:
        """SimConfig for a preset with this file's simulator/predictor settings applied.

        Explicit overrides win over file settings.
        """
        sim = self.get("simulator", {})
        pred = self.get("predictor", {})
        base = {
            "max_cycles": sim.get("max_cycles"),
            "imem_bytes": sim.get("imem_bytes"),
            "dmem_bytes": sim.get("dmem_bytes"),
            "console_address": sim.get("console_address"),
            "echo_console": sim.get("echo_console"),
            "trace": sim.get("trace"),
            "pht_entries": pred.get("pht_entries"),
            "btb_entries": pred.get("btb_entries"),
        }
        defaults = SimConfig()
        base = {k: v for k, v in base.items() if v is not None and v != getattr(defaults, k)}
        base.update({k: v for k, v in overrides.items() if v is not None})
        return SimConfig.from_preset(preset or sim.get("preset", "rvp-simple"), **base)

    def to_dict(self) -> dict[str, Any]:
        return copy.deepcopy(self._data)


_config_instance: Optional[Config] = None


def get_config(home: Optional[str | Path] = None) -> Config:
    """Get or create the process-wide Config."""
    global _config_instance
    if _config_instance is None or home is not None:
        _config_instance = Config(home)
    return _config_instance


def reset_config() -> None:
    """Drop the process-wide Config (useful for testing)."""
    global _config_instance
    _config_instance = None


__all__ = [
    "PREDICTOR_MODES",
    "DATAPATH_FORMS",
    "HAZARD_STAGES",
    "HOME_ENV_VAR",
    "ConfigError",
    "SimConfig",
    "PRESETS",
    "PROCESSOR_PRESETS",
    "resolve_home",
    "Config",
    "get_config",
    "reset_config",
]
