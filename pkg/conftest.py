"""fdehydro Test Configuration."""

import json
import sys
from pathlib import Path
from typing import Any

import numpy as np
import pytest

# Get the root directory of your project
project_root = Path(__file__).resolve().parent

# Modify sys.path to include the project root
sys.path.insert(0, str(project_root))
config_dir = project_root / "configs"
# pylint: disable=wrong-import-position
# ruff: noqa: E402
# flake8: noqa: E402
from fdehydro.experiment_config import ExperimentConfig
from fdehydro.lattice import DensityProfile, RngStream, ScalingParams

TEST_SEED = 1234


def sine(x: np.ndarray) -> np.ndarray:
    """Return the default initial density 1 + sin(2 pi x) / 2."""
    return 1.0 + 0.5 * np.sin(2.0 * np.pi * x)


@pytest.fixture
def small_params() -> ScalingParams:
    """Fixture for a 16 site torus with alpha 1/2."""
    return ScalingParams(16, 0.5)


@pytest.fixture
def rng_stream() -> RngStream:
    """Fixture for a seeded random stream."""
    return RngStream(TEST_SEED)


@pytest.fixture
def sine_profile():
    """Fixture to sample the sine profile on n sites.

    Args:
        n (int): number of sites
    """

    def _sine_profile(n: int) -> DensityProfile:
        return DensityProfile.from_function(sine, n)

    return _sine_profile


@pytest.fixture
def make_config(tmp_path):
    """Fixture to build a configuration writing into tmp_path.

    Args:
        experiment (str): experiment name
        **kwargs: any other configuration field
    """

    def _make_config(experiment: str, **kwargs: Any) -> ExperimentConfig:
        kwargs.setdefault("output_dir", str(tmp_path / experiment))
        return ExperimentConfig(experiment=experiment, **kwargs)

    return _make_config


@pytest.fixture
def write_config(tmp_path):
    """Fixture to write a JSON configuration file and return its path."""

    def _write_config(parameters: dict[str, Any], name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(parameters), encoding="utf-8")
        return path

    return _write_config
