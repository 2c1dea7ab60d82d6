"""Shared fixtures for lowsnr-capacity tests."""

import math

import pytest
from click.testing import CliRunner

from lowsnr_capacity.config import SETTING_TYPES
from lowsnr_capacity.solver import low_snr_constants

# Optimal mass point at a = 1e-3, from the fixed-point relation
HEADLINE_SNR = 1e-3
HEADLINE_X1_SQ = 4.92163735

# (x1^2, a) points shared by the oracle comparisons
ORACLE_POINTS = [
    (4.0, 1e-4),
    (4.0, 1e-3),
    (5.0, 1e-3),
    (5.0, 1e-2),
    (8.0, 1e-2),
    (16.0, 5e-2),
]


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Point the settings file at a temporary directory and clear LOWSNR_* variables."""
    config_dir = tmp_path / ".lowsnr-capacity"
    settings_file = config_dir / "settings.json"

    monkeypatch.setattr("lowsnr_capacity.config.CONFIG_DIR", config_dir)
    monkeypatch.setattr("lowsnr_capacity.config.SETTINGS_FILE", settings_file)
    for key in SETTING_TYPES:
        monkeypatch.delenv(f"LOWSNR_{key.upper()}", raising=False)

    return settings_file


@pytest.fixture
def constants():
    """Junction constants x0, a0 and xi0."""
    return low_snr_constants()


@pytest.fixture
def headline_x1():
    return math.sqrt(HEADLINE_X1_SQ)


@pytest.fixture
def runner():
    """Create a CLI runner for testing."""
    return CliRunner()
