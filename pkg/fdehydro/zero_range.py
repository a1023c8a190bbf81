"""Zero-range process with g(k) = 1{k >= 1}, speeded up by n^(2+2 alpha).

The event loops live in zrp_kernels; this module owns the state objects,
the samplers and the macroscopic observables.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from typeguard import typechecked

from .exceptions import DomainError, OrderViolationError, SizeMismatchError
from .lattice import (
    Configuration,
    DensityProfile,
    RngStream,
    ScalingParams,
    TorusIndex,
    partial_order_leq,
)
from .util import validate_checkpoints
from .zrp_kernels import (
    advance,
    advance_coupled,
    advance_one_block,
    build_occupied,
    window_sums,
    window_terms,
)

LOG = logging.getLogger(__name__)

TestFunction = Callable[[np.ndarray], np.ndarray] | np.ndarray
Observer = Callable[[Configuration], dict[str, float]]


def _check_size(expected: int, actual: int) -> None:
    if expected != actual:
        raise SizeMismatchError(expected, actual)


class SimState:
    """Mutable state of one zero-range trajectory."""

    __slots__ = (
        "_counts",
        "_occ",
        "_pos",
        "_n_occ",
        "_macro_time",
        "_params",
        "_rng",
        "_event_count",
    )

    @typechecked
    def __init__(
        self,
        config: Configuration,
        params: ScalingParams,
        rng: RngStream,
        macro_time: float = 0.0,
    ) -> None:
        """Create a state.

        Args:
            config (Configuration): initial configuration
            params (ScalingParams): lattice size and exponent
            rng (RngStream): random stream driving the clocks
            macro_time (float): starting macroscopic time

        Raises:
            SizeMismatchError: if config and params disagree on n
            DomainError: if macro_time is negative
        """
        _check_size(params.n, config.n)
        if macro_time < 0.0:
            raise DomainError(f"macro time ({macro_time}) must be >= 0")
        self._counts = config.counts.copy()
        self._occ, self._pos, self._n_occ = build_occupied(self._counts)
        self._macro_time = float(macro_time)
        self._params = params
        self._rng = rng
        self._event_count = 0

    @classmethod
    def from_profile(
        cls, profile: DensityProfile, params: ScalingParams, rng: RngStream
    ) -> "SimState":
        """Start from the slowly varying product measure of a profile."""
        return cls(sample_product_measure(profile, params, rng), params, rng)

    @property
    def config(self) -> Configuration:
        """Return a snapshot of the current configuration."""
        return Configuration(self._counts)

    @property
    def occupied(self) -> np.ndarray:
        """Return the sorted occupied sites."""
        return np.sort(self._occ[: self._n_occ])

    @property
    def macro_time(self) -> float:
        """Return the macroscopic time."""
        return self._macro_time

    @property
    def params(self) -> ScalingParams:
        """Return the scaling parameters."""
        return self._params

    @property
    def rng(self) -> RngStream:
        """Return the random stream."""
        return self._rng

    @property
    def event_count(self) -> int:
        """Return the number of jumps performed so far."""
        return self._event_count

    @property
    def total(self) -> int:
        """Return the particle number."""
        return int(self._counts.sum())

    def _advance(self, t_target: float) -> int:
        self._n_occ, self._macro_time, events = advance(
            self._counts,
            self._occ,
            self._pos,
            self._n_occ,
            self._macro_time,
            t_target,
            self._params.jump_rate,
            self._rng.generator,
        )
        self._event_count += events
        return events

    def _rebuild_occupied(self) -> None:
        self._occ, self._pos, self._n_occ = build_occupied(self._counts)

    def __repr__(self) -> str:
        return (
            f"SimState(n={self._params.n}, total={self.total}, "
            f"macro_time={self._macro_time}, events={self._event_count})"
        )


class CoupledState:
    """Two ordered copies run with the basic coupling."""

    __slots__ = ("_lower", "_upper")

    @typechecked
    def __init__(self, lower: SimState, upper: SimState) -> None:
        """Create a coupled state.

        The upper state's random stream drives both copies.

        Raises:
            SizeMismatchError: if the copies live on different tori
            DomainError: if the copies are not ordered or not synchronized
        """
        _check_size(upper.params.n, lower.params.n)
        if lower.params != upper.params:
            raise DomainError("coupled copies must share their scaling parameters")
        if lower.macro_time != upper.macro_time:
            raise DomainError("coupled copies must start at the same time")
        if not partial_order_leq(lower.config, upper.config):
            raise DomainError("lower configuration is not below the upper one")
        self._lower = lower
        self._upper = upper

    @classmethod
    def from_configurations(
        cls,
        lower: Configuration,
        upper: Configuration,
        params: ScalingParams,
        rng: RngStream,
    ) -> "CoupledState":
        """Build a coupled state driven by one stream."""
        return cls(SimState(lower, params, rng), SimState(upper, params, rng))

    @property
    def lower(self) -> SimState:
        """Return the lower copy."""
        return self._lower

    @property
    def upper(self) -> SimState:
        """Return the upper copy."""
        return self._upper

    @property
    def macro_time(self) -> float:
        """Return the shared macroscopic time."""
        return self._upper.macro_time

    def _advance(self, t_target: float) -> int:
        lower, upper = self._lower, self._upper
        upper._n_occ, _, events, violations = advance_coupled(
            lower._counts,
            upper._counts,
            upper._occ,
            upper._pos,
            upper._n_occ,
            upper._macro_time,
            t_target,
            upper._params.jump_rate,
            upper._rng.generator,
        )
        lower._rebuild_occupied()
        for state in (lower, upper):
            state._macro_time = t_target
            state._event_count += events
        if violations:
            raise OrderViolationError(violations)
        return events


@dataclass(slots=True)
class TrajectoryRecord:
    """Snapshots and observables of one trajectory at its checkpoints."""

    times: list[float] = field(default_factory=list)
    snapshots: list[Configuration] = field(default_factory=list)
    observables: list[dict[str, float]] = field(default_factory=list)
    event_count: int = 0

    def append(
        self,
        time: float,
        config: Configuration | None,
        values: dict[str, float] | None,
    ) -> None:
        """Add one checkpoint.

        Raises:
            DomainError: if time does not exceed the previous checkpoint
        """
        if self.times and time <= self.times[-1]:
            raise DomainError(f"checkpoint {time} is not after {self.times[-1]}")
        self.times.append(float(time))
        if config is not None:
            self.snapshots.append(config)
        if values is not None:
            self.observables.append(values)

    def to_frame(self) -> pd.DataFrame:
        """Return the snapshots in long format: time, site, count."""
        if not self.snapshots:
            return pd.DataFrame({"time": [], "site": [], "count": []})
        n = self.snapshots[0].n
        return pd.DataFrame(
            {
                "time": np.repeat(np.asarray(self.times), n),
                "site": np.tile(np.arange(n), len(self.snapshots)),
                "count": np.concatenate([s.counts for s in self.snapshots]),
            }
        )

    def observables_frame(self) -> pd.DataFrame:
        """Return one row per checkpoint with every observable."""
        frame = pd.DataFrame(self.observables)
        frame.insert(0, "time", self.times[: len(frame)])
        return frame

    def summary(self) -> dict[str, Any]:
        """Return a JSON-ready summary without the snapshots."""
        return {
            "times": list(self.times),
            "event_count": self.event_count,
            "observables": [dict(o) for o in self.observables],
        }


def _geometric_from_uniform(means: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    # inverse CDF: P(K >= k) = theta^k, so K = floor(ln U / ln theta)
    counts = np.zeros(means.shape, dtype=np.int64)
    positive = means > 0.0
    log_theta = -np.log1p(1.0 / means[positive])
    counts[positive] = np.floor(np.log(uniforms[positive]) / log_theta).astype(np.int64)
    return counts


def _uniforms(rng: RngStream, n: int) -> np.ndarray:
    # (0, 1]: log is finite
    return 1.0 - rng.generator.random(n)


@typechecked
def sample_product_measure(
    profile: DensityProfile, params: ScalingParams, rng: RngStream
) -> Configuration:
    """Draw independent geometric counts with means n^alpha u(x/n).

    Args:
        profile (DensityProfile): the density u at the sites
        params (ScalingParams): lattice scaling
        rng (RngStream): random stream

    Raises:
        SizeMismatchError: if the profile is not on the lattice of params

    Returns:
        Configuration: the sample
    """
    _check_size(params.n, profile.n)
    means = params.n_alpha * profile.values
    return Configuration(_geometric_from_uniform(means, _uniforms(rng, params.n)))


@typechecked
def sample_ordered_pair(
    lower_profile: DensityProfile,
    upper_profile: DensityProfile,
    params: ScalingParams,
    rng: RngStream,
) -> tuple[Configuration, Configuration]:
    """Draw both product measures from shared uniforms.

    Raises:
        DomainError: if lower_profile exceeds upper_profile somewhere

    Returns:
        tuple[Configuration, Configuration]: ordered pair (lower, upper)
    """
    _check_size(params.n, lower_profile.n)
    _check_size(params.n, upper_profile.n)
    if np.any(lower_profile.values > upper_profile.values):
        raise DomainError("lower profile must not exceed the upper profile")
    uniforms = _uniforms(rng, params.n)
    lower = _geometric_from_uniform(params.n_alpha * lower_profile.values, uniforms)
    upper = _geometric_from_uniform(params.n_alpha * upper_profile.values, uniforms)
    return Configuration(lower), Configuration(upper)


def _prepare_checkpoints(
    start: float, t_end: float, checkpoints: Sequence[float]
) -> np.ndarray:
    if t_end < start:
        raise DomainError(f"t_end ({t_end}) is before the current time ({start})")
    return validate_checkpoints(checkpoints, start, t_end)


@typechecked
def simulate(
    state: SimState,
    t_end: float,
    checkpoints: Sequence[float],
    observer: Observer | None = None,
    keep_snapshots: bool = True,
) -> TrajectoryRecord:
    """Run the exact dynamics up to t_end.

    Each checkpoint records the configuration in force at that time.

    Args:
        state (SimState): advanced in place
        t_end (float): final macroscopic time
        checkpoints (Sequence[float]): increasing times in [macro_time, t_end]
        observer (Observer | None): reduces a snapshot to named observables
        keep_snapshots (bool): store full configurations

    Raises:
        InvalidCheckpointError: on unsorted or out-of-range checkpoints
        DomainError: if t_end is before the current time

    Returns:
        TrajectoryRecord: the record
    """
    times = _prepare_checkpoints(state.macro_time, t_end, checkpoints)
    record = TrajectoryRecord()
    start_events = state.event_count
    for t in times:
        state._advance(float(t))
        config = state.config
        record.append(
            float(t),
            config if keep_snapshots else None,
            observer(config) if observer is not None else None,
        )
    state._advance(t_end)
    record.event_count = state.event_count - start_events
    LOG.debug(
        "simulated n=%d to t=%s with %d events",
        state.params.n,
        t_end,
        record.event_count,
    )
    return record


@typechecked
def simulate_coupled(
    coupled: CoupledState,
    t_end: float,
    checkpoints: Sequence[float],
    observer: Observer | None = None,
) -> tuple[TrajectoryRecord, TrajectoryRecord]:
    """Run the basic coupling up to t_end.

    Raises:
        OrderViolationError: if an event broke lower <= upper
        InvalidCheckpointError: on unsorted or out-of-range checkpoints

    Returns:
        tuple[TrajectoryRecord, TrajectoryRecord]: lower and upper records
    """
    times = _prepare_checkpoints(coupled.macro_time, t_end, checkpoints)
    records = (TrajectoryRecord(), TrajectoryRecord())
    start_events = coupled.upper.event_count
    for t in times:
        coupled._advance(float(t))
        for record, state in zip(records, (coupled.lower, coupled.upper)):
            config = state.config
            record.append(
                float(t), config, observer(config) if observer is not None else None
            )
    coupled._advance(t_end)
    for record in records:
        record.event_count = coupled.upper.event_count - start_events
    return records


def _test_function_values(func: TestFunction, n: int) -> np.ndarray:
    if callable(func):
        values = np.asarray(func(np.arange(n) / n), dtype=np.float64)
    else:
        values = np.asarray(func, dtype=np.float64)
    if values.shape != (n,):
        raise SizeMismatchError(n, values.size)
    return values


@typechecked
def empirical_pairing(
    config: Configuration, func: TestFunction, params: ScalingParams
) -> float:
    """Return n^-(1+alpha) sum_x eta(x) F(x/n).

    Args:
        config (Configuration): the configuration
        func (TestFunction): F, as a callable of x/n or as site values
        params (ScalingParams): lattice scaling
    """
    _check_size(params.n, config.n)
    values = _test_function_values(func, config.n)
    return float(np.dot(config.counts, values) / (params.n * params.n_alpha))


def _check_ell(ell: int, n: int, minimum: int) -> None:
    if not minimum <= ell <= n:
        raise DomainError(f"box size ({ell}) must lie in [{minimum}, {n}]")


@typechecked
def block_average(
    config: Configuration, x: int | TorusIndex, ell: int, params: ScalingParams
) -> float:
    """Return (n^alpha ell)^-1 sum_{i=1..ell} eta(x+i).

    Raises:
        DomainError: if ell is not in [1, n]
    """
    _check_size(params.n, config.n)
    _check_ell(ell, config.n, 1)
    site = x.x if isinstance(x, TorusIndex) else x
    idx = (site + np.arange(1, ell + 1)) % config.n
    return float(config.counts[idx].sum() / (params.n_alpha * ell))


def _one_block_terms(
    counts: np.ndarray,
    ell: int,
    f_values: np.ndarray,
    params: ScalingParams,
    cutoff: float,
) -> tuple[np.ndarray, ...]:
    block, occupied = window_sums(counts, ell)
    first, second = window_terms(
        counts, f_values, block, occupied, ell, cutoff * ell * params.n_alpha
    )
    return block, occupied, first, second


@typechecked
def one_block_statistic(
    config: Configuration,
    ell: int,
    f_values: np.ndarray,
    params: ScalingParams,
    cutoff: float,
) -> tuple[float, float]:
    """Return both one-block statistics of a configuration.

    The first compares g(eta(x)) with phi of the block density; the second is
    the cut-off local fluctuation g^{n,ell}_x - psi^{n,ell}_x.  Both are
    weighted by F and scaled by n^(alpha-1).

    Args:
        config (Configuration): the configuration
        ell (int): box size, at least 2
        f_values (np.ndarray): F at the n sites
        params (ScalingParams): lattice scaling
        cutoff (float): M, boxes with density above M are dropped

    Raises:
        DomainError: if ell < 2 or ell > n

    Returns:
        tuple[float, float]: (first, second)
    """
    _check_size(params.n, config.n)
    _check_size(config.n, f_values.size)
    _check_ell(ell, config.n, 2)
    _, _, first, second = _one_block_terms(
        config.counts, ell, f_values.astype(np.float64), params, cutoff
    )
    scale = params.n_alpha / params.n
    return float(scale * first.sum()), float(scale * second.sum())


@dataclass(slots=True, frozen=True)
class OneBlockIntegral:
    """Time integrals of both one-block statistics over one run."""

    first: float
    second: float
    final_first: float
    final_second: float
    events: int


@typechecked
def time_integrated_one_block(
    state: SimState,
    t_end: float,
    ell: int,
    f_values: np.ndarray,
    cutoff: float,
) -> OneBlockIntegral:
    """Advance state to t_end and integrate both statistics exactly.

    The statistics are piecewise constant between events, so the integral
    is a sum over holding intervals.

    Raises:
        DomainError: if ell < 2, ell > n or t_end is before the current time

    Returns:
        OneBlockIntegral: integrals plus the statistics at t_end
    """
    params = state.params
    _check_size(params.n, f_values.size)
    _check_ell(ell, params.n, 2)
    if t_end < state.macro_time:
        raise DomainError(f"t_end ({t_end}) is before the current time")
    f_values = f_values.astype(np.float64)
    cutoff_mass = cutoff * ell * params.n_alpha
    block, occupied, first, second = _one_block_terms(
        state._counts, ell, f_values, params, cutoff
    )
    (
        state._n_occ,
        state._macro_time,
        events,
        integral_first,
        integral_second,
        sum_first,
        sum_second,
    ) = advance_one_block(
        state._counts,
        state._occ,
        state._pos,
        state._n_occ,
        state._macro_time,
        t_end,
        params.jump_rate,
        state._rng.generator,
        f_values,
        block,
        occupied,
        first,
        second,
        ell,
        cutoff_mass,
    )
    state._event_count += events
    scale = params.n_alpha / params.n
    return OneBlockIntegral(
        scale * integral_first,
        scale * integral_second,
        scale * sum_first,
        scale * sum_second,
        int(events),
    )


@typechecked
def density_field(config: Configuration, params: ScalingParams) -> DensityProfile:
    """Return eta(x)/n^alpha as a profile."""
    _check_size(params.n, config.n)
    return DensityProfile(config.counts / params.n_alpha)
