"""Experiment configuration: JSON file plus command-line overrides."""

import logging
import json
import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
from typeguard import typechecked

from .const import (
    DEFAULT_ALPHA,
    DEFAULT_CHECKPOINTS,
    DEFAULT_CUTOFF,
    DEFAULT_DELTA,
    DEFAULT_ELL,
    DEFAULT_EPS,
    DEFAULT_EPS0,
    DEFAULT_EVENTS,
    DEFAULT_LOWER_LEVELS,
    DEFAULT_MAX_ELL,
    DEFAULT_MAX_K,
    DEFAULT_MAX_SUM,
    DEFAULT_MIN_REDUCTION,
    DEFAULT_N_VALUES,
    DEFAULT_NALPHA,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PAIRS,
    DEFAULT_PROFILE_AMPLITUDE,
    DEFAULT_PROFILE_OFFSET,
    DEFAULT_REFERENCE_SIZE,
    DEFAULT_REPLICAS,
    DEFAULT_RHO,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_T_END,
    DEFAULT_THREADS,
    DEFAULT_TIME_CAP,
    DEFAULT_UPPER_LEVELS,
    EXPERIMENT_ONE_BLOCK,
    EXPERIMENTS,
    HYDRODYNAMIC_EXPERIMENTS,
    MIN_LATTICE_SIZE,
    PROFILE_CONSTANT,
    PROFILE_FAMILIES,
    PROFILE_SINE,
    REFERENCE_EXPERIMENTS,
    TEST_FUNCTION_COS,
    TEST_FUNCTION_ONE,
    TEST_FUNCTION_SIN,
    TEST_FUNCTIONS,
)
from .exceptions import ConfigError
from .lattice import ScalingParams

LOG = logging.getLogger(__name__)

DETAILED_DEBUG_LOGGING = "detailed_debug_logging"

BOOLEAN_PARAMS = {DETAILED_DEBUG_LOGGING}
INT_PARAMS = {
    "replicas",
    "seed",
    "checkpoints",
    "threads",
    "reference_size",
    "ell",
    "max_sum",
    "max_ell",
    "max_k",
    "pairs",
    "events",
    "samples",
}
FLOAT_PARAMS = {
    "alpha",
    "delta",
    "eps",
    "eps0",
    "cutoff",
    "t_end",
    "time_cap",
    "min_reduction",
    "rho",
    "nalpha",
}
LIST_PARAMS = {"n_values", "upper_levels", "lower_levels", "test_functions"}
STRING_PARAMS = {"experiment", "output_dir"}
DICT_PARAMS = {"profile"}

TEST_FUNCTION_MAP: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    TEST_FUNCTION_ONE: np.ones_like,
    TEST_FUNCTION_COS: lambda x: np.cos(2.0 * np.pi * x),
    TEST_FUNCTION_SIN: lambda x: np.sin(2.0 * np.pi * x),
}


@dataclass(slots=True, frozen=True)
class ProfileSpec:
    """Named family of initial densities on the unit torus."""

    family: str = PROFILE_SINE
    offset: float = DEFAULT_PROFILE_OFFSET
    amplitude: float = DEFAULT_PROFILE_AMPLITUDE
    value: float = DEFAULT_PROFILE_OFFSET

    def __post_init__(self) -> None:
        if self.family not in PROFILE_FAMILIES:
            raise ConfigError("profile", f"family must be one of {PROFILE_FAMILIES}")
        if self.family == PROFILE_SINE and not self.offset - abs(self.amplitude) > 0.0:
            raise ConfigError("profile", "offset - amplitude must be positive")
        if self.family == PROFILE_CONSTANT and not self.value > 0.0:
            raise ConfigError("profile", "constant value must be positive")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ProfileSpec":
        """Build a spec from its JSON object."""
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("profile", f"unknown keys {sorted(unknown)}")
        for key, value in data.items():
            if key == "family":
                if not isinstance(value, str):
                    raise ConfigError("profile", "family must be a string")
            elif isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("profile", f"{key} must be a number")
        return cls(**data)

    def function(self) -> Callable[[np.ndarray], np.ndarray]:
        """Return u0 as a function of x in [0, 1)."""
        if self.family == PROFILE_CONSTANT:
            value = self.value
            return lambda x: np.full_like(x, value, dtype=np.float64)
        offset, amplitude = self.offset, self.amplitude
        return lambda x: offset + amplitude * np.sin(2.0 * np.pi * x)

    def lower_bound(self) -> float:
        """Return the minimum of u0."""
        if self.family == PROFILE_CONSTANT:
            return self.value
        return self.offset - abs(self.amplitude)

    def to_dict(self) -> dict[str, Any]:
        """Return the JSON object of this spec."""
        if self.family == PROFILE_CONSTANT:
            return {"family": self.family, "value": self.value}
        return {
            "family": self.family,
            "offset": self.offset,
            "amplitude": self.amplitude,
        }


@dataclass(slots=True)
class ExperimentConfig:
    """Validated parameters of one experiment run."""

    experiment: str
    n_values: list[int] = field(default_factory=lambda: list(DEFAULT_N_VALUES))
    alpha: float = DEFAULT_ALPHA
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    delta: float = DEFAULT_DELTA
    eps: float = DEFAULT_EPS
    eps0: float = DEFAULT_EPS0
    cutoff: float = DEFAULT_CUTOFF
    replicas: int = DEFAULT_REPLICAS
    seed: int = DEFAULT_SEED
    t_end: float = DEFAULT_T_END
    checkpoints: int = DEFAULT_CHECKPOINTS
    output_dir: str = DEFAULT_OUTPUT_DIR
    threads: int = DEFAULT_THREADS
    reference_size: int = DEFAULT_REFERENCE_SIZE
    time_cap: float = DEFAULT_TIME_CAP
    min_reduction: float = DEFAULT_MIN_REDUCTION
    rho: float = DEFAULT_RHO
    ell: int = DEFAULT_ELL
    nalpha: float = DEFAULT_NALPHA
    upper_levels: list[float] = field(default_factory=lambda: list(DEFAULT_UPPER_LEVELS))
    lower_levels: list[float] = field(default_factory=lambda: list(DEFAULT_LOWER_LEVELS))
    max_sum: int = DEFAULT_MAX_SUM
    max_ell: int = DEFAULT_MAX_ELL
    max_k: int = DEFAULT_MAX_K
    pairs: int = DEFAULT_PAIRS
    events: int = DEFAULT_EVENTS
    samples: int = DEFAULT_SAMPLES
    test_functions: list[str] = field(
        default_factory=lambda: [TEST_FUNCTION_ONE, TEST_FUNCTION_COS]
    )
    detailed_debug_logging: bool = False

    @staticmethod
    @typechecked
    def _check_experiment(experiment: str) -> None:
        if experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"must be one of {EXPERIMENTS}")

    @staticmethod
    @typechecked
    def _check_n_values(n_values: list[int]) -> None:
        if not n_values:
            raise ConfigError("n_values", "must not be empty")
        if any(n < MIN_LATTICE_SIZE for n in n_values):
            raise ConfigError("n_values", f"every n must be at least {MIN_LATTICE_SIZE}")
        if len(set(n_values)) != len(n_values):
            raise ConfigError("n_values", "must not repeat a size")

    @staticmethod
    @typechecked
    def _check_positive(name: str, value: float) -> None:
        if not math.isfinite(value) or value <= 0.0:
            raise ConfigError(name, f"must be a positive number, got {value}")

    @staticmethod
    @typechecked
    def _check_count(name: str, value: int, minimum: int = 1) -> None:
        if value < minimum:
            raise ConfigError(name, f"must be at least {minimum}, got {value}")

    @staticmethod
    @typechecked
    def _check_seed(seed: int) -> None:
        if not 0 <= seed < 2**64:
            raise ConfigError("seed", "must fit in 64 unsigned bits")

    @staticmethod
    @typechecked
    def _check_alpha(alpha: float) -> None:
        if not math.isfinite(alpha) or alpha < 0.0:
            raise ConfigError("alpha", f"must be >= 0, got {alpha}")

    @staticmethod
    @typechecked
    def _check_levels(name: str, levels: list[float]) -> None:
        if any(not isinstance(v, (int, float)) or v <= 0.0 for v in levels):
            raise ConfigError(name, "levels must be positive numbers")

    @staticmethod
    @typechecked
    def _check_test_functions(names: list[str]) -> None:
        if not names:
            raise ConfigError("test_functions", "must not be empty")
        for name in names:
            if name not in TEST_FUNCTIONS:
                raise ConfigError("test_functions", f"{name} not in {TEST_FUNCTIONS}")

    def __post_init__(self) -> None:
        self._check_experiment(self.experiment)
        self._check_n_values(self.n_values)
        self._check_alpha(self.alpha)
        if not isinstance(self.profile, ProfileSpec):
            raise ConfigError("profile", "must be a ProfileSpec")
        for name in ("delta", "eps", "eps0", "cutoff", "t_end", "time_cap"):
            self._check_positive(name, getattr(self, name))
        for name in ("min_reduction", "rho", "nalpha"):
            self._check_positive(name, getattr(self, name))
        for name in ("replicas", "checkpoints", "threads", "pairs", "events", "samples"):
            self._check_count(name, getattr(self, name))
        self._check_count("checkpoints", self.checkpoints, 2)
        self._check_count("reference_size", self.reference_size, MIN_LATTICE_SIZE)
        self._check_count("ell", self.ell, 1)
        self._check_count("max_sum", self.max_sum, 3)
        self._check_count("max_ell", self.max_ell, 1)
        self._check_count("max_k", self.max_k, 0)
        self._check_seed(self.seed)
        self._check_levels("upper_levels", self.upper_levels)
        self._check_levels("lower_levels", self.lower_levels)
        self._check_test_functions(self.test_functions)
        self._check_cross_fields()

    def _check_cross_fields(self) -> None:
        if self.experiment in HYDRODYNAMIC_EXPERIMENTS and not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"{self.experiment} needs 0 < alpha < 1")
        if (
            self.experiment == EXPERIMENT_ONE_BLOCK
            and not 2.0 * self.alpha + 3.0 * self.delta < 2.0
        ):
            raise ConfigError("delta", "one-block needs 2 alpha + 3 delta < 2")
        if self.experiment in REFERENCE_EXPERIMENTS:
            for n in self.n_values:
                if self.reference_size % n:
                    raise ConfigError(
                        "reference_size",
                        f"{self.reference_size} is not a multiple of {n}",
                    )
        if self.eps > 1.0:
            raise ConfigError("eps", "must not exceed 1")

    @property
    def output_path(self) -> Path:
        """Return the output directory."""
        return Path(self.output_dir)

    def scaling(self) -> list[ScalingParams]:
        """Return one ScalingParams per lattice size."""
        return [ScalingParams(n, self.alpha) for n in self.n_values]

    def block_size(self, n: int) -> int:
        """Return ell_n = max(2, ceil(n^delta))."""
        return max(2, math.ceil(n**self.delta - 1e-12))

    def checkpoint_times(self, t_end: float | None = None) -> list[float]:
        """Return evenly spaced checkpoints over [0, t_end]."""
        end = self.t_end if t_end is None else t_end
        return [float(t) for t in np.linspace(0.0, end, self.checkpoints)]

    def test_function(self, name: str) -> Callable[[np.ndarray], np.ndarray]:
        """Return the test function registered under name."""
        return TEST_FUNCTION_MAP[name]

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready echo of the configuration."""
        data = asdict(self)
        data["profile"] = self.profile.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        """Build a configuration from a parameter dictionary.

        Raises:
            ConfigError: on unknown keys, wrong types or invalid values
        """
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        check_parameter_types(data)
        values = dict(data)
        if "experiment" not in values:
            raise ConfigError("experiment", "is required")
        if "profile" in values and isinstance(values["profile"], dict):
            values["profile"] = ProfileSpec.from_dict(values["profile"])
        for key in ("upper_levels", "lower_levels"):
            if key in values:
                values[key] = [float(v) for v in values[key]]
        for key in FLOAT_PARAMS & set(values):
            values[key] = float(values[key])
        return cls(**values)

    @classmethod
    def from_json(
        cls, json_file: str | Path, overrides: dict[str, Any] | None = None
    ) -> "ExperimentConfig":
        """Load a configuration file, then apply non-None overrides."""
        data = load_parameters_from_json(json_file)
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        return cls.from_dict(data)


def check_parameter_types(parameters: dict[str, Any]) -> None:
    """Reject values whose JSON type does not match the parameter.

    Raises:
        ConfigError: on the first mistyped value
    """
    for key, value in parameters.items():
        if key in BOOLEAN_PARAMS and not isinstance(value, bool):
            raise ConfigError(key, f"invalid boolean value {value!r}")
        if key in INT_PARAMS and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(key, f"invalid integer value {value!r}")
        if key in FLOAT_PARAMS and (
            isinstance(value, bool) or not isinstance(value, (int, float))
        ):
            raise ConfigError(key, f"invalid float value {value!r}")
        if key in LIST_PARAMS and not isinstance(value, list):
            raise ConfigError(key, f"invalid list value {value!r}")
        if key in STRING_PARAMS and not isinstance(value, str):
            raise ConfigError(key, f"invalid string value {value!r}")
        if key in DICT_PARAMS and not isinstance(value, dict):
            raise ConfigError(key, f"invalid object value {value!r}")
    if "n_values" in parameters and any(
        isinstance(n, bool) or not isinstance(n, int) for n in parameters["n_values"]
    ):
        raise ConfigError("n_values", "every size must be an integer")


def load_parameters_from_json(json_file: str | Path) -> dict[str, Any]:
    """Load parameters from a JSON file.

    Args:
        json_file (str | Path): path to the JSON file

    Raises:
        ConfigError: if the file is missing, unreadable or not a JSON object

    Returns:
        dict[str, Any]: the parameters
    """
    try:
        with open(json_file, encoding="utf-8") as file:
            parameters = json.load(file)
    except FileNotFoundError as ex:
        raise ConfigError("config", f"file not found: {json_file}") from ex
    except json.JSONDecodeError as ex:
        raise ConfigError("config", f"error parsing JSON: {ex}") from ex
    if not isinstance(parameters, dict):
        raise ConfigError("config", "top level must be a JSON object")
    LOG.debug("loaded %d parameters from %s", len(parameters), json_file)
    return parameters
