"""Method of lines for the discretized fast diffusion equation.

The lattice system is du/dt = Lap_n phi_n(u) with
phi_n(u) = n^alpha - 1/(u + n^-alpha).  The "fast" nonlinearity -1/u is the
limit equation; Lap_n kills the constant n^alpha, so both share one RHS form.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from typeguard import typechecked

from .const import (
    DEFAULT_ATOL,
    DEFAULT_INTEGRATOR_METHOD,
    DEFAULT_MAX_EVALUATIONS,
    DEFAULT_RTOL,
    INFINITY,
    NONLINEARITIES,
    NONLINEARITY_DISCRETE,
    NONLINEARITY_FAST,
    POINCARE_REL_TOL,
)
from .exceptions import (
    DomainError,
    GridMismatchError,
    NegativityBreachError,
    SizeMismatchError,
    StiffnessFailureError,
    ZeroDensityError,
)
from .lattice import DensityProfile, ScalingParams
from .measures import phi_n, phi_n_prime
from .util import torus_distances, validate_checkpoints

LOG = logging.getLogger(__name__)

EXPLICIT_METHODS = ("RK45", "RK23", "DOP853")

ProfileLike = DensityProfile | np.ndarray


@dataclass(slots=True, frozen=True)
class IntegratorOptions:
    """Explicit adaptive Runge-Kutta settings."""

    method: str = DEFAULT_INTEGRATOR_METHOD
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL
    max_step: float = INFINITY
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS

    def __post_init__(self) -> None:
        if self.method not in EXPLICIT_METHODS:
            raise DomainError(
                f"integrator method {self.method} is not one of {EXPLICIT_METHODS}"
            )
        if self.atol <= 0.0 or self.rtol <= 0.0:
            raise DomainError("integrator tolerances must be positive")
        if self.max_step <= 0.0:
            raise DomainError("max step must be positive")
        if self.max_evaluations < 1:
            raise DomainError("evaluation budget must be positive")


@dataclass(slots=True, frozen=True)
class MolProblem:
    """Initial value problem for the lattice system."""

    params: ScalingParams
    u0: DensityProfile
    options: IntegratorOptions = field(default_factory=IntegratorOptions)
    nonlinearity: str = NONLINEARITY_DISCRETE

    def __post_init__(self) -> None:
        if self.u0.n != self.params.n:
            raise SizeMismatchError(self.params.n, self.u0.n)
        if self.nonlinearity not in NONLINEARITIES:
            raise DomainError(f"unknown nonlinearity {self.nonlinearity}")
        if self.nonlinearity == NONLINEARITY_FAST and not self.u0.is_positive():
            raise DomainError("the fast nonlinearity needs a strictly positive u0")


def _values(u: ProfileLike) -> np.ndarray:
    if isinstance(u, DensityProfile):
        return u.values
    return np.asarray(u, dtype=np.float64)


def _phi(u: np.ndarray, params: ScalingParams, nonlinearity: str) -> np.ndarray:
    if nonlinearity == NONLINEARITY_FAST:
        return -1.0 / u
    return phi_n(u, params.n_alpha)


def _phi_prime(u: np.ndarray, params: ScalingParams, nonlinearity: str) -> np.ndarray:
    if nonlinearity == NONLINEARITY_FAST:
        return 1.0 / (u * u)
    return phi_n_prime(u, params.n_alpha)


def _laplacian(f: np.ndarray, n: int) -> np.ndarray:
    return float(n) ** 2 * (np.roll(f, -1) + np.roll(f, 1) - 2.0 * f)


@typechecked
def discrete_laplacian(f: np.ndarray, n: int) -> np.ndarray:
    """Return n^2 (f(x+1) + f(x-1) - 2 f(x)) on the torus.

    Raises:
        SizeMismatchError: if f does not have n entries
    """
    if f.shape != (n,):
        raise SizeMismatchError(n, f.size)
    return _laplacian(f.astype(np.float64), n)


@typechecked
def mol_rhs(
    u: ProfileLike, params: ScalingParams, nonlinearity: str = NONLINEARITY_DISCRETE
) -> np.ndarray:
    """Return Lap_n phi_n(u)."""
    values = _values(u)
    return _laplacian(_phi(values, params, nonlinearity), params.n)


@typechecked
def energy(
    u: ProfileLike, params: ScalingParams, nonlinearity: str = NONLINEARITY_DISCRETE
) -> float:
    """Return sum_x n (phi_n(u(x+1)) - phi_n(u(x)))^2."""
    phi = _phi(_values(u), params, nonlinearity)
    return float(params.n * np.sum((np.roll(phi, -1) - phi) ** 2))


@typechecked
def energy_dissipation_rate(
    u: ProfileLike, params: ScalingParams, nonlinearity: str = NONLINEARITY_DISCRETE
) -> float:
    """Return the time derivative of the energy along the flow, always <= 0."""
    values = _values(u)
    lap = _laplacian(_phi(values, params, nonlinearity), params.n)
    prime = _phi_prime(values, params, nonlinearity)
    return float(-2.0 / params.n * np.sum(prime * lap * lap))


@typechecked
def psi_field(
    u: ProfileLike, params: ScalingParams, nonlinearity: str = NONLINEARITY_DISCRETE
) -> np.ndarray:
    """Return psi = phi_n'(u) Lap_n phi_n(u)."""
    values = _values(u)
    lap = _laplacian(_phi(values, params, nonlinearity), params.n)
    return _phi_prime(values, params, nonlinearity) * lap


@typechecked
def f_field(u: ProfileLike, params: ScalingParams) -> np.ndarray:
    """Return F_n = n^alpha Lap_n phi_n(u) / phi_n(u).

    Raises:
        ZeroDensityError: if phi_n(u) vanishes at a site
    """
    phi = phi_n(_values(u), params.n_alpha)
    zeros = np.flatnonzero(phi == 0.0)
    if zeros.size:
        raise ZeroDensityError(int(zeros[0]))
    return params.n_alpha * _laplacian(phi, params.n) / phi


@typechecked
def psi_energy(u: ProfileLike, params: ScalingParams) -> float:
    """Return sum_x n (psi(x+1) - psi(x))^2."""
    psi = psi_field(u, params)
    return float(params.n * np.sum((np.roll(psi, -1) - psi) ** 2))


@typechecked
def psi_time_derivative(u: ProfileLike, params: ScalingParams) -> np.ndarray:
    """Return d(psi)/dt along the flow: phi_n'(u) Lap_n psi - 2 (n^-alpha + u) psi^2."""
    values = _values(u)
    psi = psi_field(values, params)
    return phi_n_prime(values, params.n_alpha) * _laplacian(
        psi, params.n
    ) - 2.0 * (params.inverse_n_alpha + values) * psi * psi


@typechecked
def time_window(u0: ProfileLike, params: ScalingParams) -> tuple[float, float, float]:
    """Return (T, Psi_bar, u_bar) for the initial datum.

    Psi_bar = max |Lap_n phi_n(u0)| / phi_n'(u0), u_bar = max u0 and
    T = 1 / (4 Psi_bar (n^-alpha + u_bar)), infinite when Psi_bar is 0.
    """
    values = _values(u0)
    lap = _laplacian(phi_n(values, params.n_alpha), params.n)
    psi_bar = float(np.max(np.abs(lap) / phi_n_prime(values, params.n_alpha)))
    u_bar = float(values.max())
    if psi_bar == 0.0:
        return INFINITY, 0.0, u_bar
    return 1.0 / (4.0 * psi_bar * (params.inverse_n_alpha + u_bar)), psi_bar, u_bar


@typechecked
def psi_window(u0: ProfileLike, params: ScalingParams) -> tuple[float, float]:
    """Return (T0, Psi0) with Psi0 = max |psi_0| and T0 = 1/(4 Psi0 (n^-alpha + u_bar)).

    sup |psi_t| <= 2 Psi0 for every t <= T0.
    """
    values = _values(u0)
    psi0 = float(np.max(np.abs(psi_field(values, params))))
    if psi0 == 0.0:
        return INFINITY, 0.0
    return 1.0 / (4.0 * psi0 * (params.inverse_n_alpha + float(values.max()))), psi0


@typechecked
def time_derivative_bound(u0: ProfileLike, params: ScalingParams) -> float:
    """Return 2 (n^-alpha + u_bar)^2 Psi0, a bound on sup |du/dt| up to T0."""
    _, psi0 = psi_window(u0, params)
    u_bar = float(_values(u0).max())
    return 2.0 * (params.inverse_n_alpha + u_bar) ** 2 * psi0


@typechecked
def holder_constant(u: ProfileLike) -> float:
    """Return the smallest K with |u(y) - u(x)| <= K |(y - x)/n|^(1/2)."""
    values = _values(u)
    n = values.size
    if n < 2:
        return 0.0
    dist = torus_distances(n)
    off = dist > 0
    diff = np.abs(values[:, None] - values[None, :])
    return float(np.max(diff[off] / np.sqrt(dist[off] / n)))


@typechecked
def poincare_holds(u: ProfileLike, params: ScalingParams) -> bool:
    """Return whether |phi_n(u(y)) - phi_n(u(x))| <= E_n(u)^(1/2) |(y-x)/n|^(1/2)."""
    values = _values(u)
    phi = phi_n(values, params.n_alpha)
    bound_scale = math.sqrt(energy(values, params))
    dist = torus_distances(params.n)
    lhs = np.abs(phi[:, None] - phi[None, :])
    rhs = bound_scale * np.sqrt(dist / params.n)
    return bool(np.all(lhs <= rhs * (1.0 + POINCARE_REL_TOL) + 1e-15))


@dataclass(slots=True)
class MolSolution:
    """Profiles of a lattice solution at its checkpoints."""

    times: np.ndarray
    profiles: np.ndarray
    params: ScalingParams
    nonlinearity: str = NONLINEARITY_DISCRETE
    evaluations: int = 0

    @property
    def n(self) -> int:
        """Return the lattice size."""
        return self.params.n

    def profile_at(self, index: int) -> DensityProfile:
        """Return the profile at checkpoint index."""
        return DensityProfile(np.maximum(self.profiles[index], 0.0))

    def masses(self) -> np.ndarray:
        """Return sum_x u_t(x) per checkpoint."""
        return self.profiles.sum(axis=1)

    def mass_drift(self) -> float:
        """Return the largest relative deviation of the mass from its first value."""
        masses = self.masses()
        if masses.size == 0 or masses[0] == 0.0:
            return 0.0
        return float(np.max(np.abs(masses - masses[0])) / abs(masses[0]))

    def diagnostics_frame(self) -> pd.DataFrame:
        """Return one row per checkpoint: mass, energy, min, max, sup_psi, sup_f."""
        rows = []
        for t, u in zip(self.times, self.profiles):
            if self.nonlinearity == NONLINEARITY_DISCRETE and np.all(u > 0.0):
                sup_f = float(np.max(np.abs(f_field(u, self.params))))
            else:
                sup_f = math.nan
            rows.append(
                {
                    "time": float(t),
                    "mass": float(u.sum()),
                    "energy": energy(u, self.params, self.nonlinearity),
                    "min": float(u.min()),
                    "max": float(u.max()),
                    "sup_psi": float(
                        np.max(np.abs(psi_field(u, self.params, self.nonlinearity)))
                    ),
                    "sup_f": sup_f,
                }
            )
        return pd.DataFrame(rows)

    def to_frame(self) -> pd.DataFrame:
        """Return the profiles in long format: time, site, value."""
        count = len(self.times)
        return pd.DataFrame(
            {
                "time": np.repeat(self.times, self.n),
                "site": np.tile(np.arange(self.n), count),
                "value": self.profiles.reshape(-1),
            }
        )


class _EvaluationBudgetExceeded(Exception):
    def __init__(self, time: float):
        super().__init__(time)
        self.time = time


def _checkpoint_times(t_end: float, checkpoints: Sequence[float]) -> np.ndarray:
    if t_end < 0.0 or not math.isfinite(t_end):
        raise DomainError(f"t_end ({t_end}) must be finite and >= 0")
    if len(checkpoints) == 0:
        return np.unique(np.array([0.0, t_end]))
    return validate_checkpoints(checkpoints, 0.0, t_end)


@typechecked
def integrate(
    problem: MolProblem, t_end: float, checkpoints: Sequence[float]
) -> MolSolution:
    """Integrate the lattice system from u0 up to t_end.

    Args:
        problem (MolProblem): the initial value problem
        t_end (float): final time
        checkpoints (Sequence[float]): output times in [0, t_end], all of
            [0, t_end] endpoints when empty

    Raises:
        StiffnessFailureError: if the step size collapsed or the evaluation
            budget ran out
        NegativityBreachError: if a density went negative
        InvalidCheckpointError: on bad checkpoints

    Returns:
        MolSolution: profiles at the checkpoints
    """
    params, options = problem.params, problem.options
    times = _checkpoint_times(t_end, checkpoints)
    u0 = problem.u0.values.astype(np.float64)
    if t_end == 0.0:
        return MolSolution(
            times, np.tile(u0, (times.size, 1)), params, problem.nonlinearity
        )

    evaluations = 0

    def rhs(t: float, u: np.ndarray) -> np.ndarray:
        nonlocal evaluations
        evaluations += 1
        if evaluations > options.max_evaluations:
            raise _EvaluationBudgetExceeded(t)
        return _laplacian(_phi(u, params, problem.nonlinearity), params.n)

    def negativity(t: float, u: np.ndarray) -> float:
        return float(u.min())

    negativity.terminal = True  # type: ignore[attr-defined]
    negativity.direction = -1  # type: ignore[attr-defined]

    LOG.debug(
        "integrating n=%d alpha=%s nonlinearity=%s to t=%s",
        params.n,
        params.alpha,
        problem.nonlinearity,
        t_end,
    )
    try:
        result = solve_ivp(
            rhs,
            (0.0, t_end),
            u0,
            method=options.method,
            t_eval=times,
            atol=options.atol,
            rtol=options.rtol,
            max_step=options.max_step,
            events=negativity,
        )
    except _EvaluationBudgetExceeded as ex:
        raise StiffnessFailureError(
            f"more than {options.max_evaluations} RHS evaluations", ex.time
        ) from ex
    except (FloatingPointError, ZeroDivisionError) as ex:
        raise StiffnessFailureError(str(ex), math.nan) from ex
    if result.status == 1:
        event_time = float(result.t_events[0][0])
        event_value = float(result.y_events[0][0].min())
        raise NegativityBreachError(event_time, event_value)
    if result.status != 0:
        last = float(result.t[-1]) if result.t.size else 0.0
        raise StiffnessFailureError(result.message, last)
    LOG.debug("integration used %d RHS evaluations", evaluations)
    return MolSolution(
        np.asarray(result.t), result.y.T.copy(), params, problem.nonlinearity, evaluations
    )


@typechecked
def reference_fde_solve(
    u0: Callable[[np.ndarray], np.ndarray],
    reference_size: int,
    t_end: float,
    checkpoints: Sequence[float],
    options: IntegratorOptions | None = None,
) -> MolSolution:
    """Solve du/dt = Lap(-1/u) on a fine grid.

    Args:
        u0: macroscopic initial density, evaluated at x/reference_size
        reference_size (int): number of grid points
        t_end (float): final time
        checkpoints (Sequence[float]): output times
        options (IntegratorOptions | None): integrator settings

    Raises:
        DomainError: if u0 is not strictly positive on the grid
    """
    profile = DensityProfile.from_function(u0, reference_size)
    problem = MolProblem(
        ScalingParams(reference_size, 0.0),
        profile,
        options or IntegratorOptions(),
        NONLINEARITY_FAST,
    )
    return integrate(problem, t_end, checkpoints)


@typechecked
def sup_error(
    solution: MolSolution, reference: MolSolution, horizon: float = INFINITY
) -> float:
    """Return max |u_t(x) - u_ref(t, x N_ref / n)| over checkpoints t <= horizon.

    Raises:
        GridMismatchError: if the reference grid is not a multiple of n or
            the checkpoints differ
    """
    if reference.n % solution.n:
        raise GridMismatchError(
            f"reference size {reference.n} is not a multiple of {solution.n}"
        )
    if solution.times.shape != reference.times.shape or not np.allclose(
        solution.times, reference.times, rtol=1e-12, atol=0.0
    ):
        raise GridMismatchError("solutions have different checkpoints")
    stride = reference.n // solution.n
    mask = solution.times <= horizon
    if not np.any(mask):
        return 0.0
    diff = solution.profiles[mask] - reference.profiles[mask][:, ::stride]
    return float(np.max(np.abs(diff)))
