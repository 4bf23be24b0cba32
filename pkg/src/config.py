"""
Runtime settings read from the environment (and an optional ``.env`` file).
"""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

try:
    from .errors import ConfigurationError
except ImportError:
    from errors import ConfigurationError


class Settings(BaseModel):
    """Bounds and switches for the solvers and the enumeration oracles."""
    max_partition_size: int = Field(default=8, ge=1)        # |X| bound for partition search
    grid_max_rules: int = Field(default=200_000, ge=1)      # grid oracle enumeration cap
    grid_max_resolution: int = Field(default=6, ge=1)       # largest N for the grid oracle
    grid_max_dimension: int = Field(default=4, ge=1)        # |X| and |A| cap for the grid oracle
    verify_lp: bool = False                                 # recheck every LP certificate
    calibration_audit: bool = True                          # also test pairwise vertex midpoints
    output_dir: str = "outputs"


_ENV_KEYS = {
    "max_partition_size": "CREDAL_MAX_PARTITIONS",
    "grid_max_rules": "CREDAL_GRID_MAX_RULES",
    "grid_max_resolution": "CREDAL_GRID_MAX_RESOLUTION",
    "grid_max_dimension": "CREDAL_GRID_MAX_DIMENSION",
    "verify_lp": "CREDAL_VERIFY_LP",
    "calibration_audit": "CREDAL_CALIBRATION_AUDIT",
    "output_dir": "CREDAL_OUTPUT_DIR",
}


def _parse_flag(name: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off", ""):
        return False
    raise ConfigurationError(f"{name} must be a boolean flag, got '{raw}'")


def _parse_int(name: str, raw: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got '{raw}'")


def load_settings(**overrides) -> Settings:
    """Build Settings from CREDAL_* environment variables, then apply overrides."""
    load_dotenv()

    values = {}
    defaults = Settings()
    for field_name, env_name in _ENV_KEYS.items():
        raw = os.getenv(env_name)
        if raw is None:
            continue
        default = getattr(defaults, field_name)
        if isinstance(default, bool):
            values[field_name] = _parse_flag(env_name, raw)
        elif isinstance(default, int):
            values[field_name] = _parse_int(env_name, raw)
        else:
            values[field_name] = raw

    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**values)
    except ValueError as e:
        raise ConfigurationError(f"Invalid settings: {e}")


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, loaded on first use."""
    global _settings
    if _settings is None:
        _settings = load_settings()
    return _settings


def reset_settings() -> None:
    """Forget cached settings so the next get_settings() re-reads the environment."""
    global _settings
    _settings = None


def use_settings(settings: Settings) -> None:
    """Install explicit settings (CLI flags) for the rest of the process."""
    global _settings
    _settings = settings
