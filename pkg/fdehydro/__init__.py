"""Numerical experiments for the fast diffusion limit of a zero-range process."""

from .const import __version__
from .experiment_config import ExperimentConfig
from .experiments import ResultBundle, run_experiment

__all__ = ["ExperimentConfig", "ResultBundle", "__version__", "run_experiment"]
