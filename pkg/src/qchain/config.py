"""Configuration models using Pydantic."""

from __future__ import annotations

import logging
import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from qchain.constants import (
    DEFAULT_CONFIG_FILE,
    DEFAULT_DIM_CAP,
    DEFAULT_SIGNIFICANT_DIGITS,
    DEFAULT_TOLERANCE,
    DISTRIBUTION_TOLERANCE,
    ENV_PREFIX,
    EQUIVALENCE_TOLERANCE,
    LOG_DEFAULT_BACKUP_COUNT,
    LOG_DEFAULT_FILE,
    LOG_DEFAULT_MAX_SIZE_MB,
    LOG_LEVELS,
    UNITARITY_TOLERANCE,
)

EnvPath = tuple[str, ...]
EngineName = Literal["feynman", "evolution", "both"]
OutputFormat = Literal["table", "json", "csv"]

DIM_CAP_ENV = f"{ENV_PREFIX}_DIM_CAP"

ENV_VAR_PATHS: dict[str, EnvPath] = {
    # Numerics
    DIM_CAP_ENV: ("numerics", "dim_cap"),
    f"{ENV_PREFIX}_TOLERANCE": ("numerics", "tolerance"),
    f"{ENV_PREFIX}_UNITARITY_TOLERANCE": ("numerics", "unitarity_tolerance"),
    f"{ENV_PREFIX}_ENGINE": ("numerics", "engine"),
    f"{ENV_PREFIX}_PRUNE_BELOW": ("numerics", "prune_below"),
    # Output
    f"{ENV_PREFIX}_FORMAT": ("output", "format"),
    f"{ENV_PREFIX}_SIGNIFICANT_DIGITS": ("output", "significant_digits"),
    # Logging
    f"{ENV_PREFIX}_LOGS_LEVEL": ("logs", "level"),
    f"{ENV_PREFIX}_LOGS_SAVE_TO_FILE": ("logs", "save_to_file"),
    f"{ENV_PREFIX}_LOGS_FILE": ("logs", "file"),
}


def _get_nested(data: dict[str, Any], path: EnvPath) -> tuple[bool, Any]:
    """Retrieve a nested value and whether it exists."""
    current: Any = data
    for key in path:
        if not isinstance(current, dict) or key not in current:
            return False, None
        current = current[key]
    return True, current


def _set_nested(data: dict[str, Any], path: EnvPath, value: Any) -> None:
    """Set a nested value, creating intermediate dicts as needed."""
    current: dict[str, Any] = data
    for key in path[:-1]:
        current = current.setdefault(key, {})
    current[path[-1]] = value


def _merge_env_with_config(config_dict: dict[str, Any]) -> dict[str, Any]:
    """
    Apply environment values with precedence over qchain.yaml.

    If both env and config provide the same field, the env value wins and the
    override is logged at INFO level.
    """
    merged = deepcopy(config_dict)
    logger = logging.getLogger("qchain.config")

    for env_var, path in ENV_VAR_PATHS.items():
        if env_var not in os.environ:
            continue

        env_value = os.environ[env_var]
        exists, existing_value = _get_nested(merged, path)

        if exists:
            logger.info(
                "Env %s overrides config %s (config=%s, env=%s)",
                env_var,
                ".".join(path),
                existing_value,
                env_value,
            )

        _set_nested(merged, path, env_value)

    return merged


def resolve_dim_cap(explicit: int | None = None) -> int:
    """
    Effective composite dimension cap.

    Args:
        explicit: Cap passed by the caller; wins over everything else.

    Returns:
        The explicit cap, else the value of QCHAIN_DIM_CAP, else the default.

    Raises:
        ValueError: If QCHAIN_DIM_CAP is not a positive integer.
    """
    if explicit is not None:
        return explicit
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as e:
        raise ValueError(f"{DIM_CAP_ENV} must be an integer, got {raw!r}") from e
    if cap < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be positive, got {cap}")
    return cap


class NumericsConfig(BaseModel):
    """Numerical tolerances, capacity and engine selection."""

    dim_cap: int = Field(
        default=DEFAULT_DIM_CAP, ge=2, description="Largest allowed composite dimension"
    )
    tolerance: float = Field(
        default=DEFAULT_TOLERANCE,
        gt=0,
        lt=1,
        description="Consistency tolerance on history off-diagonals",
    )
    unitarity_tolerance: float = Field(
        default=UNITARITY_TOLERANCE,
        gt=0,
        lt=1,
        description="Allowed deviation of document matrices from unitarity",
    )
    normalization_tolerance: float = Field(
        default=DISTRIBUTION_TOLERANCE,
        gt=0,
        lt=1,
        description="Allowed deviation of a distribution total from 1",
    )
    equivalence_tolerance: float = Field(
        default=EQUIVALENCE_TOLERANCE,
        gt=0,
        lt=1,
        description="Allowed per-entry difference between the two engines",
    )
    engine: EngineName = Field(default="feynman", description="Engine used by run")
    prune_below: float | None = Field(
        default=None,
        ge=0,
        description="Drop path-sum branches whose amplitude norm falls below this value",
    )


class OutputConfig(BaseModel):
    """Report output settings."""

    format: OutputFormat = Field(default="table", description="Report format")
    significant_digits: int = Field(
        default=DEFAULT_SIGNIFICANT_DIGITS,
        ge=1,
        le=17,
        description="Significant digits printed for probabilities",
    )


class LogsConfig(BaseModel):
    """Logging configuration."""

    level: str = Field(
        default="WARNING",
        description="Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)",
    )
    save_to_file: bool = Field(default=False, description="Enable file logging")
    file: Path = Field(default=LOG_DEFAULT_FILE, description="Log file path")
    max_size_mb: int = Field(
        default=LOG_DEFAULT_MAX_SIZE_MB,
        ge=1,
        le=1000,
        description="Maximum log file size in MB before rotation",
    )
    backup_count: int = Field(
        default=LOG_DEFAULT_BACKUP_COUNT,
        ge=0,
        le=100,
        description="Number of backup files to keep",
    )

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        if v.upper() not in LOG_LEVELS:
            raise ValueError(f"Log level must be one of {LOG_LEVELS}")
        return v.upper()


class AppConfig(BaseSettings):
    """Main application configuration."""

    model_config = SettingsConfigDict(
        env_prefix=f"{ENV_PREFIX}_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="ignore",
    )

    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logs: LogsConfig = Field(default_factory=LogsConfig)

    @classmethod
    def from_yaml(cls, path: Path | str) -> AppConfig:
        """Load configuration from YAML file with environment variable overrides."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        with path.open() as f:
            yaml_config: dict[str, Any] = yaml.safe_load(f) or {}

        return cls(**_merge_env_with_config(yaml_config))

    @classmethod
    def load(cls, config_path: Path | str | None = None) -> AppConfig:
        """
        Load configuration from a file, the default location, or defaults.

        An explicit path must exist. Without one, ./qchain.yaml is used when
        present and built-in defaults otherwise.
        """
        if config_path is not None:
            return cls.from_yaml(config_path)
        if DEFAULT_CONFIG_FILE.exists():
            return cls.from_yaml(DEFAULT_CONFIG_FILE)
        return cls(**_merge_env_with_config({}))

    def save(self, path: Path | str | None = None) -> None:
        """Save configuration to YAML file."""
        path = Path(path) if path is not None else DEFAULT_CONFIG_FILE

        config_dict: dict[str, Any] = {
            "numerics": self.numerics.model_dump(exclude_none=True),
            "output": self.output.model_dump(),
            "logs": self.logs.model_dump(mode="json"),
        }

        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as f:
            yaml.safe_dump(config_dict, f, default_flow_style=False, sort_keys=False)


def generate_example_config() -> str:
    """Generate example configuration YAML."""
    return """\
# qchain configuration

# Numerics
numerics:
  dim_cap: 4096                 # Largest composite dimension (env QCHAIN_DIM_CAP wins)
  tolerance: 1.0e-10            # Consistency tolerance (--tol overrides)
  unitarity_tolerance: 1.0e-10  # Allowed deviation of matrices from unitarity
  normalization_tolerance: 1.0e-9   # Allowed |sum P - 1|
  equivalence_tolerance: 1.0e-9     # Allowed |P_feynman - P_evolution| per entry
  engine: feynman               # feynman, evolution or both
#  prune_below: 1.0e-15          # Drop negligible path-sum branches (off by default)

# Report output
output:
  format: table                 # table, json or csv
  significant_digits: 12

# Logging
logs:
  level: WARNING                # Log level: DEBUG, INFO, WARNING, ERROR, CRITICAL
  save_to_file: false           # Enable file logging
  file: log/qchain.log          # Log file path
  max_size_mb: 10               # Max file size before rotation (1-1000 MB)
  backup_count: 5               # Number of rotated backup files (0-100)
"""
