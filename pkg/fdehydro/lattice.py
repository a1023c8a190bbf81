"""Lattice types shared by the simulator, the solver and the ensembles."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from typeguard import typechecked

from .const import MIN_LATTICE_SIZE
from .exceptions import (
    DomainError,
    EmptySiteError,
    NotNeighborError,
    SizeMismatchError,
)

LOG = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class ScalingParams:
    """Lattice size n and mass exponent alpha.

    n_alpha and speedup are derived once and stay consistent with (n, alpha).
    """

    n: int
    alpha: float
    n_alpha: float = field(init=False)
    speedup: float = field(init=False)

    @staticmethod
    @typechecked
    def _check_n(n: int) -> None:
        if n < MIN_LATTICE_SIZE:
            raise DomainError(f"lattice size ({n}) must be at least {MIN_LATTICE_SIZE}")

    @staticmethod
    @typechecked
    def _check_alpha(alpha: float) -> None:
        if not math.isfinite(alpha) or alpha < 0.0:
            raise DomainError(f"alpha ({alpha}) must be a finite number >= 0")

    def __post_init__(self) -> None:
        self._check_n(self.n)
        self._check_alpha(self.alpha)
        n_alpha = math.exp(self.alpha * math.log(self.n))
        object.__setattr__(self, "n_alpha", n_alpha)
        object.__setattr__(self, "speedup", float(self.n) ** 2 * n_alpha**2)

    @property
    def inverse_n_alpha(self) -> float:
        """Return n^-alpha, the offset of the discrete nonlinearity."""
        return 1.0 / self.n_alpha

    @property
    def jump_rate(self) -> float:
        """Return the clock rate 2 n^(2+2 alpha) of an occupied site."""
        return 2.0 * self.speedup

    def with_size(self, n: int) -> "ScalingParams":
        """Return the same alpha on another lattice size."""
        return ScalingParams(n, self.alpha)


@dataclass(slots=True, frozen=True)
class TorusIndex:
    """Site x of the discrete circle with n points."""

    x: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"torus size ({self.n}) must be positive")
        if not 0 <= self.x < self.n:
            raise DomainError(f"site {self.x} outside [0, {self.n})")

    @classmethod
    def wrap(cls, x: int, n: int) -> "TorusIndex":
        """Return the site x reduced modulo n."""
        return cls(x % n, n)

    def __add__(self, step: int) -> "TorusIndex":
        return TorusIndex((self.x + step) % self.n, self.n)

    def __sub__(self, step: int) -> "TorusIndex":
        return TorusIndex((self.x - step) % self.n, self.n)

    def neighbors(self) -> tuple["TorusIndex", "TorusIndex"]:
        """Return the left and right neighbors."""
        return self - 1, self + 1

    def is_neighbor(self, other: "TorusIndex") -> bool:
        """Return whether other is a nearest neighbor on the same torus."""
        if other.n != self.n:
            return False
        step = (other.x - self.x) % self.n
        return step in (1, self.n - 1) and step != 0

    def embed(self) -> float:
        """Return the macroscopic position x/n."""
        return self.x / self.n


class Configuration:
    """Particle counts per torus site.

    The counts array is copied on construction and frozen.
    """

    __slots__ = ("_counts", "_total")

    @typechecked
    def __init__(self, counts: np.ndarray | list[int] | tuple[int, ...]) -> None:
        """Create a configuration.

        Args:
            counts: particle number at each site

        Raises:
            DomainError: if a count is negative or the array is not flat
        """
        arr = np.array(counts, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("configuration must be a non-empty flat array")
        if np.any(arr < 0):
            raise DomainError("particle counts must be non-negative")
        arr.flags.writeable = False
        self._counts = arr
        self._total = int(arr.sum())

    @classmethod
    def zeros(cls, n: int) -> "Configuration":
        """Return the empty configuration on n sites."""
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def counts(self) -> np.ndarray:
        """Return the read-only counts."""
        return self._counts

    @property
    def total(self) -> int:
        """Return the particle number."""
        return self._total

    @property
    def n(self) -> int:
        """Return the number of sites."""
        return int(self._counts.size)

    @property
    def occupied(self) -> np.ndarray:
        """Return the sorted indices of occupied sites."""
        return np.flatnonzero(self._counts)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, x: int | TorusIndex) -> int:
        if isinstance(x, TorusIndex):
            x = x.x
        return int(self._counts[x % self.n])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return bool(np.array_equal(self._counts, other._counts))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Configuration(n={self.n}, total={self._total})"

    def to_frame(self) -> pd.DataFrame:
        """Return one row per site: site, count."""
        return pd.DataFrame({"site": np.arange(self.n), "count": self._counts})

    def to_record(self, params: ScalingParams) -> dict[str, Any]:
        """Return the compact JSON record {n, alpha, data}."""
        if params.n != self.n:
            raise SizeMismatchError(params.n, self.n)
        return {"n": self.n, "alpha": params.alpha, "data": self._counts.tolist()}

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> tuple["Configuration", ScalingParams]:
        """Rebuild a configuration and its scaling from a JSON record."""
        config = cls(list(record["data"]))
        if config.n != record["n"]:
            raise SizeMismatchError(record["n"], config.n)
        return config, ScalingParams(int(record["n"]), float(record["alpha"]))


class DensityProfile:
    """Non-negative real field on the torus, the macroscopic density."""

    __slots__ = ("_values",)

    @typechecked
    def __init__(self, values: np.ndarray | list[float] | tuple[float, ...]) -> None:
        """Create a profile.

        Args:
            values: density at each site

        Raises:
            DomainError: if a value is negative or not finite
        """
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("profile must be a non-empty flat array")
        if not np.all(np.isfinite(arr)):
            raise DomainError("profile values must be finite")
        if np.any(arr < 0.0):
            raise DomainError("profile values must be non-negative")
        arr.flags.writeable = False
        self._values = arr

    @classmethod
    def from_function(
        cls, func: Callable[[np.ndarray], np.ndarray], n: int
    ) -> "DensityProfile":
        """Sample a macroscopic function at the embedded sites x/n."""
        return cls(np.asarray(func(np.arange(n) / n), dtype=np.float64))

    @classmethod
    def constant(cls, value: float, n: int) -> "DensityProfile":
        """Return the constant profile."""
        return cls(np.full(n, value, dtype=np.float64))

    @property
    def values(self) -> np.ndarray:
        """Return the read-only values."""
        return self._values

    @property
    def n(self) -> int:
        """Return the number of sites."""
        return int(self._values.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensityProfile):
            return NotImplemented
        return bool(np.array_equal(self._values, other._values))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"DensityProfile(n={self.n}, min={self._values.min()}, "
            f"max={self._values.max()})"
        )

    def is_positive(self) -> bool:
        """Return whether every value is strictly positive."""
        return bool(np.all(self._values > 0.0))

    def to_frame(self) -> pd.DataFrame:
        """Return one row per site: site, value."""
        return pd.DataFrame({"site": np.arange(self.n), "value": self._values})

    def to_record(self, params: ScalingParams) -> dict[str, Any]:
        """Return the compact JSON record {n, alpha, data}."""
        if params.n != self.n:
            raise SizeMismatchError(params.n, self.n)
        return {"n": self.n, "alpha": params.alpha, "data": self._values.tolist()}

    @classmethod
    def from_record(
        cls, record: dict[str, Any]
    ) -> tuple["DensityProfile", ScalingParams]:
        """Rebuild a profile and its scaling from a JSON record."""
        profile = cls([float(v) for v in record["data"]])
        if profile.n != record["n"]:
            raise SizeMismatchError(record["n"], profile.n)
        return profile, ScalingParams(int(record["n"]), float(record["alpha"]))


class RngStream:
    """Seeded, splittable random stream.

    Children come from SeedSequence.spawn, so replica streams depend only on the
    root seed and the replica index, never on scheduling.
    """

    __slots__ = ("_seed_sequence", "_generator")

    @typechecked
    def __init__(self, seed: int | np.random.SeedSequence) -> None:
        """Create a stream.

        Args:
            seed: 64-bit non-negative seed, or a SeedSequence

        Raises:
            DomainError: if the seed is negative or wider than 64 bits
        """
        if isinstance(seed, int):
            if not 0 <= seed < 2**64:
                raise DomainError(f"seed ({seed}) must fit in 64 unsigned bits")
            seed = np.random.SeedSequence(seed)
        self._seed_sequence = seed
        self._generator = np.random.Generator(np.random.PCG64(seed))

    @property
    def seed(self) -> int:
        """Return the root entropy."""
        return int(self._seed_sequence.entropy)

    @property
    def spawn_key(self) -> tuple[int, ...]:
        """Return the position of this stream in the spawn tree."""
        return tuple(self._seed_sequence.spawn_key)

    @property
    def generator(self) -> np.random.Generator:
        """Return the underlying generator."""
        return self._generator

    def spawn(self, count: int) -> list["RngStream"]:
        """Return count independent child streams."""
        if count < 0:
            raise DomainError(f"cannot spawn {count} streams")
        return [RngStream(child) for child in self._seed_sequence.spawn(count)]

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, spawn_key={self.spawn_key})"


def _site(x: int | TorusIndex, n: int) -> int:
    if isinstance(x, TorusIndex):
        if x.n != n:
            raise SizeMismatchError(n, x.n)
        return x.x
    if not 0 <= x < n:
        raise DomainError(f"site {x} outside [0, {n})")
    return x


@typechecked
def jump_configuration(
    eta: Configuration, x: int | TorusIndex, y: int | TorusIndex
) -> Configuration:
    """Move one particle from x to its neighbor y.

    Args:
        eta (Configuration): starting configuration
        x (int | TorusIndex): departure site
        y (int | TorusIndex): arrival site, a nearest neighbor of x

    Raises:
        NotNeighborError: if y is not a neighbor of x
        EmptySiteError: if x holds no particle

    Returns:
        Configuration: eta^{x,y}
    """
    n = eta.n
    xs = _site(x, n)
    ys = _site(y, n)
    step = (ys - xs) % n
    if step == 0 or step not in (1, n - 1):
        raise NotNeighborError(xs, ys, n)
    if eta.counts[xs] == 0:
        raise EmptySiteError(xs)
    counts = eta.counts.copy()
    counts[xs] -= 1
    counts[ys] += 1
    return Configuration(counts)


@typechecked
def partial_order_leq(eta1: Configuration, eta2: Configuration) -> bool:
    """Return whether eta1(x) <= eta2(x) at every site.

    Raises:
        SizeMismatchError: if the configurations live on different tori
    """
    if eta1.n != eta2.n:
        raise SizeMismatchError(eta1.n, eta2.n)
    return bool(np.all(eta1.counts <= eta2.counts))
