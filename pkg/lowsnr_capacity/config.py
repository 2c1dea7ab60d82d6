"""Configuration and settings management for lowsnr-capacity."""

import json
import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from .simulate import MAX_SEED, MIN_SAMPLES
from .solver import DEFAULT_A_MAX, ORDER_LIMIT

# Load environment variables from .env file
load_dotenv()

# App directories
APP_NAME = "lowsnr-capacity"
CONFIG_DIR = Path.home() / f".{APP_NAME}"
SETTINGS_FILE = CONFIG_DIR / "settings.json"

ENV_PREFIX = "LOWSNR_"


@dataclass(frozen=True)
class Settings:
    """Run defaults; CLI flags override them per invocation."""

    a_max: float = DEFAULT_A_MAX
    order_limit: float = ORDER_LIMIT
    seed: int = 20240601
    samples: int = 1_000_000
    jobs: int = 1


SETTING_TYPES: dict[str, type] = {f.name: type(f.default) for f in fields(Settings)}


def _check_range(key: str, value: float | int) -> float | int:
    """Apply the ranges the command-line options enforce."""
    if key == "samples" and value < MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_SAMPLES}, got {value!r}")
    if key == "jobs" and value < 1:
        raise ValueError(f"jobs must be at least 1, got {value!r}")
    if key == "seed" and not 0 <= value < MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {value!r}")
    if key == "a_max" and not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"a_max must be positive and finite, got {value!r}")
    if key == "order_limit" and not math.isfinite(value):
        raise ValueError(f"order_limit must be finite, got {value!r}")
    return value


def _coerce(key: str, raw: Any) -> float | int:
    """Convert a raw file or environment value to the setting's type and check its range."""
    kind = SETTING_TYPES[key]
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
        raise ValueError(f"{key} must be a number, got {raw!r}")
    if kind is int:
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(f"{key} must be an integer, got {raw!r}")
        return _check_range(key, int(raw))
    return _check_range(key, float(raw))


def _read_settings_file() -> dict[str, Any]:
    if not SETTINGS_FILE.exists():
        return {}
    try:
        with open(SETTINGS_FILE) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError):
        return {}
    return data if isinstance(data, dict) else {}


def get_settings() -> Settings:
    """Resolve settings: environment over settings file over defaults."""
    values: dict[str, float | int] = {}

    for key, raw in _read_settings_file().items():
        if key in SETTING_TYPES:
            try:
                values[key] = _coerce(key, raw)
            except ValueError:
                pass

    for key in SETTING_TYPES:
        raw = os.getenv(f"{ENV_PREFIX}{key.upper()}")
        if raw:
            try:
                values[key] = _coerce(key, raw)
            except ValueError:
                pass

    return Settings(**values)  # type: ignore[arg-type]


def save_settings(**updates: Any) -> Settings:
    """Merge ``updates`` into the settings file.

    Raises:
        ValueError: On an unknown key, a value of the wrong type or one out of range.
    """
    unknown = sorted(set(updates) - set(SETTING_TYPES))
    if unknown:
        raise ValueError(f"Unknown setting(s): {', '.join(unknown)}")

    stored = {k: v for k, v in _read_settings_file().items() if k in SETTING_TYPES}
    stored.update({key: _coerce(key, value) for key, value in updates.items()})

    CONFIG_DIR.mkdir(parents=True, exist_ok=True)
    with open(SETTINGS_FILE, "w") as f:
        json.dump(stored, f, indent=2, sort_keys=True)
    # Set restrictive permissions
    SETTINGS_FILE.chmod(0o600)
    return Settings(**{**asdict(Settings()), **stored})


def clear_settings() -> None:
    """Remove the saved settings file."""
    if SETTINGS_FILE.exists():
        SETTINGS_FILE.unlink()
