"""
Configuration utilities for the aggregate runtime and warehouse simulator.
Handles loading YAML defaults, flat experiment manifests and the simulator
configuration record.
"""

import math
import os
import yaml
from dataclasses import dataclass, asdict, fields, replace
from typing import Any, Dict, List, Mapping, Optional


DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config.yaml")


class ConfigError(ValueError):
    """Raised when a configuration value is missing, unknown or out of range."""


class Config:
    """
    Configuration manager class for the runtime.
    Loads settings from YAML file and provides access methods.
    """

    def __init__(self, config_path: str = DEFAULT_CONFIG_PATH):
        """
        Initialize the Configuration manager.

        Args:
            config_path: Path to the configuration YAML file
        """
        self.config_path = config_path
        self.config_data = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """
        Load configuration from YAML file.

        Returns:
            Dict containing configuration settings
        """
        if not os.path.exists(self.config_path):
            raise FileNotFoundError(f"Configuration file not found at: {self.config_path}")

        try:
            with open(self.config_path, 'r') as config_file:
                config_data = yaml.safe_load(config_file)
        except yaml.YAMLError as e:
            raise ConfigError(f"Error loading configuration: {e}")

        return config_data or {}

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get a configuration value using dot notation path.

        Args:
            key_path: Dot-separated path to configuration value
            default: Default value to return if path not found

        Returns:
            Configuration value or default if not found
        """
        keys = key_path.split('.')
        value = self.config_data

        try:
            for key in keys:
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def get_all(self) -> Dict[str, Any]:
        """
        Get the entire configuration dictionary.
        """
        return self.config_data

    def get_section(self, section: str) -> Dict[str, Any]:
        """
        Get one top-level section, or an empty dict if absent.

        Args:
            section: Section name, e.g. "simulation"
        """
        return dict(self.get(section, {}) or {})

    def get_log_level(self) -> str:
        """
        Get the log level for the system.

        Returns:
            String containing log level
        """
        return self.get("system.log_level", "INFO")

    def get_log_file(self) -> Optional[str]:
        return self.get("system.log_file")


@dataclass(frozen=True)
class SimConfig:
    """
    Every knob of a simulation run: runtime, network, geometry and services.

    Field names double as CLI flag names and flat manifest keys.
    """
    scenario: str = "warehouse"
    seed: int = 1
    duration: float = 500.0
    comm_radius: float = 10.0
    drop_rate: float = 0.0
    period: float = 1.0
    latency: float = 0.005
    mobility_tick: float = 0.25
    message_budget: int = 222
    staleness: int = 3
    quarantine: int = 5
    # warehouse geometry
    rows: int = 6
    cols: int = 2
    slots_x: int = 8
    slots_y: int = 2
    spacing: float = 1.5
    corridor: float = 3.0
    loading_slots: int = 10
    loading_empty: int = 6
    fill_ratio: float = 0.75
    forklifts: int = 4
    # services
    max_speed: float = 10.0 / 3.6
    safety_radius: float = 6.0
    approach_threshold: float = 1.0
    led_radius: int = 8
    log_ttl: int = 20
    search_timeout: float = 120.0
    zipf_exponent: float = 1.0
    kinds: int = 100
    idle_min: float = 1.0
    idle_max: float = 10.0

    @classmethod
    def field_names(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_config(cls, cfg: Config) -> "SimConfig":
        """
        Build a SimConfig from the sections of a YAML configuration.

        Args:
            cfg: Loaded configuration

        Returns:
            SimConfig with YAML values over the dataclass defaults
        """
        values: Dict[str, Any] = {}
        for section in ("runtime", "simulation", "warehouse"):
            values.update(cfg.get_section(section))
        known = set(cls.field_names())
        return cls().with_overrides({k: v for k, v in values.items() if k in known})

    def with_overrides(self, overrides: Mapping[str, Any]) -> "SimConfig":
        """
        Return a copy with the given fields replaced.

        Args:
            overrides: Mapping of field name (dashes allowed) to value

        Returns:
            New SimConfig

        Raises:
            ConfigError: if a key is not a SimConfig field or a value has the wrong type
        """
        known = {f.name: f for f in fields(self)}
        changes: Dict[str, Any] = {}
        for raw_key, value in overrides.items():
            key = raw_key.replace('-', '_')
            if key not in known:
                raise ConfigError(f"Unknown configuration key: {raw_key}")
            if value is None:
                continue
            changes[key] = _coerce(key, value, type(getattr(self, key)))
        return replace(self, **changes)

    def validate(self) -> "SimConfig":
        """
        Check every field against its domain.

        Returns:
            self, for chaining

        Raises:
            ConfigError: listing all violations
        """
        problems = [
            f"{item.name} must be finite (got {getattr(self, item.name)})"
            for item in fields(self)
            if isinstance(getattr(self, item.name), float) and not math.isfinite(getattr(self, item.name))
        ]
        if problems:
            raise ConfigError("; ".join(problems))
        problems = []
        if self.duration < 0:
            problems.append(f"duration must be >= 0 (got {self.duration})")
        if self.period <= 0:
            problems.append(f"period must be > 0 (got {self.period})")
        if self.comm_radius <= 0:
            problems.append(f"comm_radius must be > 0 (got {self.comm_radius})")
        if not 0.0 <= self.drop_rate <= 1.0:
            problems.append(f"drop_rate must be within [0, 1] (got {self.drop_rate})")
        if self.latency < 0 or self.latency >= self.period:
            problems.append(f"latency must be within [0, period) (got {self.latency})")
        if self.mobility_tick <= 0:
            problems.append(f"mobility_tick must be > 0 (got {self.mobility_tick})")
        if self.staleness < 1:
            problems.append(f"staleness must be >= 1 (got {self.staleness})")
        if not 1 <= self.quarantine <= 127:
            problems.append(f"quarantine must be within [1, 127] (got {self.quarantine})")
        if self.message_budget <= 0:
            problems.append(f"message_budget must be > 0 (got {self.message_budget})")
        for name in ("rows", "cols", "slots_x", "slots_y", "kinds"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1 (got {getattr(self, name)})")
        for name in ("spacing", "corridor", "max_speed", "safety_radius", "approach_threshold", "search_timeout"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be > 0 (got {getattr(self, name)})")
        if self.forklifts < 0:
            problems.append(f"forklifts must be >= 0 (got {self.forklifts})")
        if not 0 <= self.loading_empty <= self.loading_slots:
            problems.append("loading_empty must be within [0, loading_slots]")
        if not 0.0 <= self.fill_ratio <= 1.0:
            problems.append(f"fill_ratio must be within [0, 1] (got {self.fill_ratio})")
        if self.led_radius < 0 or self.log_ttl < 1:
            problems.append("led_radius must be >= 0 and log_ttl >= 1")
        if self.zipf_exponent <= 0:
            problems.append(f"zipf_exponent must be > 0 (got {self.zipf_exponent})")
        if not 0 <= self.idle_min <= self.idle_max:
            problems.append("idle_min must be within [0, idle_max]")
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _coerce(key: str, value: Any, target: type) -> Any:
    """Convert a manifest/CLI value to the field's declared type."""
    if target is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{key} expects true/false (got {value!r})")
    try:
        if target is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if target is float:
            return float(value)
        return target(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} expects {target.__name__} (got {value!r})")


def load_flat_config(path: str) -> Dict[str, Any]:
    """
    Load a flat `key = value` experiment manifest.

    Args:
        path: Path to the manifest

    Returns:
        Dict of keys to typed values

    Raises:
        ConfigError: on a malformed line
    """
    values: Dict[str, Any] = {}
    with open(path, 'r') as manifest:
        for number, line in enumerate(manifest, start=1):
            text = line.split('#', 1)[0].strip()
            if not text:
                continue
            if '=' not in text:
                raise ConfigError(f"{path}:{number}: expected 'key = value'")
            key, raw = (part.strip() for part in text.split('=', 1))
            if not key:
                raise ConfigError(f"{path}:{number}: empty key")
            try:
                values[key.replace('-', '_')] = yaml.safe_load(raw) if raw else None
            except yaml.YAMLError as e:
                raise ConfigError(f"{path}:{number}: {e}")
    return values


# Create a singleton instance
config = Config()
