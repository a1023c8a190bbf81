"""Geometric laws, rate functions and concentration bounds.

Conventions: a geometric law of mean m has pmf (1 - theta) theta^k with
theta = m / (1 + m), so that its moment generating function is
M_m(lambda) = 1 / (1 - m (e^lambda - 1)).  All logarithms are natural.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from typeguard import typechecked

from .const import INFINITY
from .exceptions import DomainError, SizeMismatchError
from .lattice import DensityProfile, ScalingParams

LOG = logging.getLogger(__name__)

FloatOrArray = float | np.ndarray


@dataclass(slots=True, frozen=True)
class GeometricLaw:
    """Geometric law on {0, 1, 2, ...} with the given mean."""

    mean: float
    theta: float = field(init=False)

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean) or self.mean <= 0.0:
            raise DomainError(f"geometric mean ({self.mean}) must be positive")
        object.__setattr__(self, "theta", self.mean / (1.0 + self.mean))

    def pmf(self, k: int | np.ndarray) -> FloatOrArray:
        """Return P(X = k)."""
        return np.exp(self.log_pmf(k))

    def log_pmf(self, k: int | np.ndarray) -> FloatOrArray:
        """Return ln P(X = k)."""
        k = np.asarray(k, dtype=np.float64)
        # ln(1 - theta) = -ln(1 + m), ln(theta) = ln(m) - ln(1 + m)
        return -np.log1p(self.mean) + k * (np.log(self.mean) - np.log1p(self.mean))

    @property
    def variance(self) -> float:
        """Return m (1 + m)."""
        return self.mean * (1.0 + self.mean)

    def mgf(self, lam: float) -> float:
        """Return E[exp(lam X)], +infinity outside the domain."""
        return mgf_geometric(self.mean, lam)

    def sample(self, rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
        """Draw independent samples."""
        return rng.geometric(1.0 - self.theta, size=size) - 1


@dataclass(slots=True, frozen=True)
class RateFunctionParams:
    """Reference means for the concentration and comparison lemmas."""

    rho: float
    rho_plus: float | None = None
    rho_minus: float | None = None
    kappa: float | None = None
    kappa_tilde: float | None = None

    def __post_init__(self) -> None:
        if self.rho <= 0.0:
            raise DomainError(f"rho ({self.rho}) must be positive")
        if self.rho_minus is not None and not 0.0 < self.rho_minus <= self.rho:
            raise DomainError(f"rho_minus ({self.rho_minus}) must lie in (0, rho]")
        if self.rho_plus is not None and self.rho_plus < self.rho:
            raise DomainError(f"rho_plus ({self.rho_plus}) must be at least rho")
        if self.kappa is not None or self.kappa_tilde is not None:
            kappa = self.kappa if self.kappa is not None else 0.0
            kappa_tilde = self.kappa_tilde if self.kappa_tilde is not None else 1.0
            if not 0.0 < kappa <= kappa_tilde <= 1.0:
                raise DomainError(
                    f"need 0 < kappa ({self.kappa}) <= kappa_tilde "
                    f"({self.kappa_tilde}) <= 1"
                )

    @property
    def k_plus(self) -> float:
        """Return K+ = (rho_plus / rho)^2."""
        if self.rho_plus is None:
            raise DomainError("K+ needs rho_plus")
        return (self.rho_plus / self.rho) ** 2

    @classmethod
    def from_means(cls, means: np.ndarray) -> "RateFunctionParams":
        """Build the envelope rho-, rho+ of a family of site means."""
        means = np.asarray(means, dtype=np.float64)
        rho_minus = float(means.min())
        rho_plus = float(means.max())
        return cls(rho=rho_minus, rho_plus=rho_plus, rho_minus=rho_minus)


@typechecked
def theta_from_mean(mean: float, nalpha: float) -> float:
    """Return theta_n(rho) = rho n^alpha / (1 + rho n^alpha).

    Raises:
        DomainError: if mean <= 0 or nalpha < 1
    """
    if mean <= 0.0:
        raise DomainError(f"mean ({mean}) must be positive")
    if nalpha < 1.0:
        raise DomainError(f"n^alpha ({nalpha}) must be at least 1")
    scaled = mean * nalpha
    return scaled / (1.0 + scaled)


def phi(rho: FloatOrArray) -> FloatOrArray:
    """Return rho / (1 + rho), the mean jump rate under a law of mean rho."""
    return rho / (1.0 + rho)


def phi_n(u: FloatOrArray, nalpha: float) -> FloatOrArray:
    """Return n^alpha phi(n^alpha u)."""
    return nalpha * phi(nalpha * u)


def phi_n_prime(u: FloatOrArray, nalpha: float) -> FloatOrArray:
    """Return (n^-alpha + u)^-2."""
    return 1.0 / (1.0 / nalpha + u) ** 2


@typechecked
def rate_exponential(rho: float, a: float) -> float:
    """Return I_rho(a) = a/rho - 1 - ln(a/rho).

    Evaluated as x - log1p(x) with x = a/rho - 1 to avoid cancellation at a = rho.

    Raises:
        DomainError: if rho <= 0 or a <= 0
    """
    if rho <= 0.0:
        raise DomainError(f"rho ({rho}) must be positive")
    if a <= 0.0:
        raise DomainError(f"a ({a}) must be positive")
    x = a / rho - 1.0
    return max(0.0, x - math.log1p(x))


@typechecked
def rate_geometric(rho: float, a: float) -> float:
    """Return the geometric rate function.

    a ln(a (1 + rho) / (rho (1 + a))) - ln((1 + a) / (1 + rho)), with the limit
    ln(1 + rho) at a = 0.

    Raises:
        DomainError: if rho <= 0 or a < 0
    """
    if rho <= 0.0:
        raise DomainError(f"rho ({rho}) must be positive")
    if a < 0.0:
        raise DomainError(f"a ({a}) must be non-negative")
    if a == 0.0:
        return math.log1p(rho)
    # ln(a/rho) and ln((1+a)/(1+rho)) through log1p of relative increments
    log_ratio = math.log1p((a - rho) / rho)
    log_ratio_plus = math.log1p((a - rho) / (1.0 + rho))
    return max(0.0, a * (log_ratio - log_ratio_plus) - log_ratio_plus)


@typechecked
def mgf_geometric(rho: float, lam: float) -> float:
    """Return 1 / (1 - rho (e^lam - 1)), or +infinity for lam >= ln((1+rho)/rho).

    Raises:
        DomainError: if rho <= 0
    """
    if rho <= 0.0:
        raise DomainError(f"rho ({rho}) must be positive")
    if lam >= math.log1p(1.0 / rho):
        return INFINITY
    denominator = 1.0 - rho * math.expm1(lam)
    if denominator <= 0.0:
        return INFINITY
    return 1.0 / denominator


@typechecked
def log_mgf_geometric(rho: float, lam: float) -> float:
    """Return ln M_rho(lam), +infinity outside the domain."""
    value = mgf_geometric(rho, lam)
    if value == INFINITY:
        return INFINITY
    return -math.log1p(-rho * math.expm1(lam))


@typechecked
def legendre_rate_geometric(rho: float, a: float, lambdas: np.ndarray) -> float:
    """Return sup over the lambda grid of lam a - ln M_rho(lam).

    Grid points outside the MGF domain are skipped.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    inside = lambdas < math.log1p(1.0 / rho)
    lam = lambdas[inside]
    if lam.size == 0:
        raise DomainError("lambda grid lies outside the MGF domain")
    values = lam * a + np.log1p(-rho * np.expm1(lam))
    return float(values.max())


def _chernoff(rho_ref: float, nalpha: float, ell: int, a: float) -> float:
    correction = (a / nalpha) * (1.0 / rho_ref - 1.0 / a) ** 2
    exponent = ell * (-rate_exponential(rho_ref, a) + correction)
    return min(1.0, math.exp(min(exponent, 0.0)))


@typechecked
def chernoff_upper(
    params: RateFunctionParams, nalpha: float, ell: int, a: float
) -> float:
    """Return the upper-tail bound on P(S >= ell a n^alpha).

    exp(ell (-I_{rho+}(a) + (a / n^alpha)(1/rho+ - 1/a)^2)), clamped to 1.

    Raises:
        DomainError: if a < rho+
    """
    rho_plus = params.rho_plus if params.rho_plus is not None else params.rho
    if a < rho_plus:
        raise DomainError(f"a ({a}) must be at least rho+ ({rho_plus})")
    if ell < 1 or nalpha <= 0.0:
        raise DomainError("ell must be positive and n^alpha positive")
    return _chernoff(rho_plus, nalpha, ell, a)


@typechecked
def chernoff_lower(
    params: RateFunctionParams, nalpha: float, ell: int, a: float
) -> float:
    """Return the lower-tail bound on P(S <= ell a n^alpha).

    Raises:
        DomainError: if a > rho- or a <= 0
    """
    rho_minus = params.rho_minus if params.rho_minus is not None else params.rho
    if a <= 0.0 or a > rho_minus:
        raise DomainError(f"a ({a}) must lie in (0, rho- ({rho_minus})]")
    if ell < 1 or nalpha <= 0.0:
        raise DomainError("ell must be positive and n^alpha positive")
    return _chernoff(rho_minus, nalpha, ell, a)


@typechecked
def sample_block_sum(
    means: np.ndarray, nalpha: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw size copies of S = sum of independent geometrics of means rho_i n^alpha."""
    means = np.asarray(means, dtype=np.float64)
    if np.any(means <= 0.0):
        raise DomainError("block means must be positive")
    success = 1.0 / (1.0 + means * nalpha)
    draws = rng.geometric(success, size=(size, means.size)) - 1
    return draws.sum(axis=1)


def m_n(u: FloatOrArray, v: FloatOrArray, nalpha: float) -> FloatOrArray:
    """Return -(v - u)^2 / ((n^-alpha + u)^2 (n^-alpha + v))."""
    s = 1.0 / nalpha
    return -((v - u) ** 2) / ((s + u) ** 2 * (s + v))


def m_n_defining(u: FloatOrArray, v: FloatOrArray, nalpha: float) -> FloatOrArray:
    """Return phi_n(v) - phi_n(u) - phi_n'(u)(v - u)."""
    return phi_n(v, nalpha) - phi_n(u, nalpha) - phi_n_prime(u, nalpha) * (v - u)


@typechecked
def mn_bound_constant(eps: float, eps0: float) -> float:
    """Return C = max(4/eps, 2/(eps0 eps^2)).

    Raises:
        DomainError: unless 0 < eps <= 1 and eps0 > 0
    """
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"eps ({eps}) must lie in (0, 1]")
    if eps0 <= 0.0:
        raise DomainError(f"eps0 ({eps0}) must be positive")
    return max(4.0 / eps, 2.0 / (eps0 * eps * eps))


@typechecked
def verify_mn_bound(u: float, v: float, nalpha: float, C: float) -> bool:
    """Return whether |M_n(u, v)| <= C I_u(v).

    Raises:
        DomainError: if u or v is not positive
    """
    if u <= 0.0 or v <= 0.0:
        raise DomainError(f"u ({u}) and v ({v}) must be positive")
    lhs = abs(float(m_n(u, v, nalpha)))
    rhs = C * rate_exponential(u, v)
    return lhs <= rhs + 1e-12 * max(1.0, rhs)


@typechecked
def rate_comparison_quadratic(rho: float, z: float) -> bool:
    """Return whether I_rho(z) <= ((z - rho)/rho)^2.

    Raises:
        DomainError: unless z > rho / 2
    """
    if rho <= 0.0 or z <= rho / 2.0:
        raise DomainError(f"need rho > 0 and z ({z}) > rho/2 ({rho / 2.0})")
    bound = ((z - rho) / rho) ** 2
    return rate_exponential(rho, z) <= bound + 1e-12 * max(1.0, bound)


@typechecked
def rate_comparison_scaled(rho: float, rho_plus: float, a: float) -> bool:
    """Return whether I_rho(a) <= 16 K+ I_{rho+}(a), K+ = (rho+/rho)^2.

    Raises:
        DomainError: unless 0 < rho <= rho+ and a >= K+ rho
    """
    if not 0.0 < rho <= rho_plus:
        raise DomainError(f"need 0 < rho ({rho}) <= rho+ ({rho_plus})")
    k_plus = (rho_plus / rho) ** 2
    if a < k_plus * rho:
        raise DomainError(f"a ({a}) must be at least K+ rho ({k_plus * rho})")
    bound = 16.0 * k_plus * rate_exponential(rho_plus, a)
    return rate_exponential(rho, a) <= bound + 1e-12 * max(1.0, bound)


def _check_tilt(rho: float, rho_tilde: float, kappa: float, kappa_tilde: float) -> None:
    if rho <= 0.0 or rho_tilde <= 0.0:
        raise DomainError("rho and rho_tilde must be positive")
    if not 0.0 < kappa <= kappa_tilde <= 1.0:
        raise DomainError(f"need 0 < kappa ({kappa}) <= kappa_tilde ({kappa_tilde}) <= 1")
    if kappa_tilde * rho <= kappa * rho_tilde:
        raise DomainError("need kappa_tilde rho > kappa rho_tilde")


@typechecked
def tilted_rate(
    z: FloatOrArray, rho: float, rho_tilde: float, kappa: float, kappa_tilde: float
) -> FloatOrArray:
    """Return kappa I_rho(z) - kappa_tilde I_{rho_tilde}(z) for z > 0."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(z <= 0.0):
        raise DomainError("z must be positive")
    value = kappa * (z / rho - 1.0 - np.log(z / rho)) - kappa_tilde * (
        z / rho_tilde - 1.0 - np.log(z / rho_tilde)
    )
    return float(value) if value.ndim == 0 else value


@typechecked
def tilted_rate_max(
    rho: float, rho_tilde: float, kappa: float, kappa_tilde: float
) -> tuple[float, float]:
    """Return the stationary point z* of the tilted rate and its upper bound.

    z* = (1 - kappa/kappa_tilde) rho rho_tilde / (rho - kappa rho_tilde / kappa_tilde)
    bound = kappa kappa_tilde (kappa_tilde - kappa/2) (rho - rho_tilde)^2
            / (kappa_tilde rho - kappa rho_tilde)^2

    Raises:
        DomainError: if kappa_tilde rho <= kappa rho_tilde or the ranges are violated
    """
    _check_tilt(rho, rho_tilde, kappa, kappa_tilde)
    ratio = kappa / kappa_tilde
    z_star = (1.0 - ratio) * rho * rho_tilde / (rho - ratio * rho_tilde)
    bound = (
        kappa
        * kappa_tilde
        * (kappa_tilde - kappa / 2.0)
        * (rho - rho_tilde) ** 2
        / (kappa_tilde * rho - kappa * rho_tilde) ** 2
    )
    return z_star, bound


def _site_means(
    profile1: DensityProfile, profile2: DensityProfile, nalpha: float
) -> tuple[np.ndarray, np.ndarray]:
    if profile1.n != profile2.n:
        raise SizeMismatchError(profile1.n, profile2.n)
    if not (profile1.is_positive() and profile2.is_positive()):
        raise DomainError("relative entropy needs strictly positive profiles")
    return nalpha * profile1.values, nalpha * profile2.values


@typechecked
def relative_entropy_geometric_products(
    profile1: DensityProfile, profile2: DensityProfile, nalpha: float
) -> float:
    """Return H(nu1 | nu2) for product geometric laws of means n^alpha profile_i.

    Each site contributes the geometric rate function of mean m2 evaluated at m1.

    Raises:
        DomainError: on zero or negative means
        SizeMismatchError: if the profiles have different sizes
    """
    m1, m2 = _site_means(profile1, profile2, nalpha)
    log_ratio = np.log1p((m1 - m2) / m2)
    log_ratio_plus = np.log1p((m1 - m2) / (1.0 + m2))
    per_site = m1 * (log_ratio - log_ratio_plus) - log_ratio_plus
    return float(np.maximum(per_site, 0.0).sum())


@typechecked
def entropy_inequality(
    profile1: DensityProfile,
    profile2: DensityProfile,
    coefficients: np.ndarray,
    nalpha: float,
    gamma: float,
) -> tuple[float, float]:
    """Return both sides of the entropy inequality for f = sum c_x eta(x).

    lhs = E_{nu1}[f], rhs = (H(nu1|nu2) + ln E_{nu2}[exp(gamma f)]) / gamma.

    Raises:
        DomainError: if gamma <= 0
    """
    if gamma <= 0.0:
        raise DomainError(f"gamma ({gamma}) must be positive")
    m1, m2 = _site_means(profile1, profile2, nalpha)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.size != m1.size:
        raise SizeMismatchError(m1.size, coefficients.size)
    lhs = float(np.dot(coefficients, m1))
    entropy = relative_entropy_geometric_products(profile1, profile2, nalpha)
    log_mgf = 0.0
    for mean, c in zip(m2, coefficients):
        value = log_mgf_geometric(float(mean), float(gamma * c))
        if value == INFINITY:
            return lhs, INFINITY
        log_mgf += value
    return lhs, (entropy + log_mgf) / gamma


@typechecked
def cutoff_bound(
    t: float, f_sup: float, params: ScalingParams, delta: float, eps: float, eps0: float
) -> float:
    """Return t |F|_inf n^(1+alpha) exp(-n^delta I_eps(eps0)).

    Bounds the contribution of blocks whose density falls below eps0 when the
    profile stays above eps.

    Raises:
        DomainError: unless 0 < eps0 < eps and delta > 0
    """
    if not 0.0 < eps0 < eps:
        raise DomainError(f"need 0 < eps0 ({eps0}) < eps ({eps})")
    if delta <= 0.0:
        raise DomainError(f"delta ({delta}) must be positive")
    block = math.exp(delta * math.log(params.n))
    exponent = -block * rate_exponential(eps, eps0)
    return t * f_sup * params.n * params.n_alpha * math.exp(exponent)
