"""Test invariant measures and rate functions."""

import math

import numpy as np
import pytest

from fdehydro.const import INFINITY
from fdehydro.exceptions import DomainError, SizeMismatchError
from fdehydro.lattice import DensityProfile, ScalingParams
from fdehydro.measures import (
    GeometricLaw,
    RateFunctionParams,
    chernoff_lower,
    chernoff_upper,
    cutoff_bound,
    entropy_inequality,
    legendre_rate_geometric,
    log_mgf_geometric,
    m_n,
    m_n_defining,
    mgf_geometric,
    mn_bound_constant,
    phi,
    phi_n,
    phi_n_prime,
    rate_comparison_quadratic,
    rate_comparison_scaled,
    rate_exponential,
    rate_geometric,
    relative_entropy_geometric_products,
    sample_block_sum,
    theta_from_mean,
    tilted_rate,
    tilted_rate_max,
    verify_mn_bound,
)


class TestGeometricLaw:
    # pmf sums to one and has the requested mean
    def test_pmf_mean(self):
        law = GeometricLaw(3.0)
        k = np.arange(400)
        pmf = law.pmf(k)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
        assert (k * pmf).sum() == pytest.approx(3.0, rel=1e-10)
        assert law.variance == 12.0
        assert law.theta == 0.75
        assert law.mgf(math.log(1.2)) == pytest.approx(2.5)

    def test_sample_mean(self):
        samples = GeometricLaw(2.0).sample(np.random.default_rng(5), 200_000)
        assert samples.min() >= 0
        assert samples.mean() == pytest.approx(2.0, rel=0.02)

    def test_invalid_mean(self):
        with pytest.raises(DomainError):
            GeometricLaw(0.0)


def test_theta_from_mean():
    """Check theta_n at n^alpha = 4."""
    assert theta_from_mean(1.0, 4.0) == pytest.approx(0.8)
    with pytest.raises(DomainError):
        theta_from_mean(1.0, 0.5)


class TestNonlinearity:
    def test_phi_values(self):
        assert phi(1.0) == 0.5
        assert phi_n(1.0, 2.0) == pytest.approx(4.0 / 3.0)

    # phi_n(rho) - n^alpha tends to -1/rho
    def test_phi_n_limit(self):
        gaps = [phi_n(2.0, nalpha) - nalpha for nalpha in (10.0, 100.0, 1000.0)]
        assert gaps == pytest.approx([-0.47619, -0.49751, -0.49975], abs=1e-5)

    # phi_n is n^alpha - 1/(u + n^-alpha)
    def test_phi_n_closed_form(self):
        u = np.array([0.0, 0.5, 2.0])
        assert phi_n(u, 4.0) == pytest.approx(4.0 - 1.0 / (u + 0.25))

    # derivative matches a central difference
    def test_phi_n_prime(self):
        h = 1e-6
        numeric = (phi_n(1.0 + h, 4.0) - phi_n(1.0 - h, 4.0)) / (2 * h)
        assert phi_n_prime(1.0, 4.0) == pytest.approx(numeric, rel=1e-7)

    # Taylor remainder agrees with its closed form
    def test_m_n_closed_form(self):
        u = np.linspace(0.1, 3.0, 7)
        v = np.linspace(2.5, 0.2, 7)
        assert m_n(u, v, 8.0) == pytest.approx(m_n_defining(u, v, 8.0), rel=1e-9)
        assert np.all(m_n(u, v, 8.0) <= 0.0)


class TestRateFunctions:
    def test_exponential_values(self):
        assert rate_exponential(1.0, 1.0) == 0.0
        assert rate_exponential(1.0, 2.0) == pytest.approx(1.0 - math.log(2.0))
        with pytest.raises(DomainError):
            rate_exponential(1.0, 0.0)

    def test_geometric_values(self):
        assert rate_geometric(2.0, 2.0) == 0.0
        assert rate_geometric(2.0, 0.0) == pytest.approx(math.log(3.0))
        expected = 3.0 * math.log(3.0 * 3.0 / (2.0 * 4.0)) - math.log(4.0 / 3.0)
        assert rate_geometric(2.0, 3.0) == pytest.approx(expected)

    # large means recover the exponential rate function
    def test_geometric_scaling_limit(self):
        gaps = [
            abs(rate_geometric(2.0 * m, 4.0 * m) - rate_exponential(2.0, 4.0))
            for m in (10.0, 100.0, 1000.0)
        ]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] <= 1e-3

    # Legendre transform of ln M agrees with the closed form
    @pytest.mark.parametrize("rho, a", [(1.0, 0.3), (1.0, 2.5), (0.5, 4.0)])
    def test_legendre(self, rho, a):
        lambdas = np.linspace(-8.0, math.log1p(1.0 / rho) * (1 - 1e-9), 40001)
        assert legendre_rate_geometric(rho, a, lambdas) == pytest.approx(
            rate_geometric(rho, a), abs=1e-5
        )

    def test_legendre_outside_domain(self):
        with pytest.raises(DomainError):
            legendre_rate_geometric(1.0, 1.0, np.array([5.0, 6.0]))


class TestMgf:
    def test_mgf_values(self):
        assert mgf_geometric(1.0, 0.0) == 1.0
        assert mgf_geometric(1.0, math.log(1.5)) == pytest.approx(2.0)
        assert log_mgf_geometric(1.0, math.log(1.5)) == pytest.approx(math.log(2.0))

    def test_mgf_diverges(self):
        assert mgf_geometric(1.0, 0.7) == INFINITY
        assert log_mgf_geometric(1.0, 1.0) == INFINITY


class TestConcentration:
    # upper bound at a = rho+ is trivial
    def test_upper_bound_clamped(self):
        params = RateFunctionParams(1.0)
        assert chernoff_upper(params, 4.0, 10, 1.0) == 1.0

    # direct evaluation of the exponent at n^alpha = 4, ell = 100
    def test_direct_evaluation(self):
        upper = chernoff_upper(RateFunctionParams(1.0, rho_plus=1.0), 4.0, 100, 2.0)
        assert upper == pytest.approx(math.exp(-100 * (1.0 - math.log(2.0) - 0.125)))
        assert upper == pytest.approx(math.exp(-18.185), rel=1e-3)
        lower = chernoff_lower(RateFunctionParams(1.0, rho_minus=1.0), 4.0, 100, 0.5)
        assert lower == pytest.approx(math.exp(-6.8147), rel=1e-3)

    def test_bounds_dominate_samples(self):
        params = RateFunctionParams(1.0)
        rng = np.random.default_rng(11)
        sums = sample_block_sum(np.ones(20), 4.0, 50_000, rng)
        assert sums.mean() == pytest.approx(80.0, rel=0.01)
        assert (sums >= 20 * 1.5 * 4.0).mean() <= chernoff_upper(params, 4.0, 20, 1.5)
        assert (sums <= 20 * 0.6 * 4.0).mean() <= chernoff_lower(params, 4.0, 20, 0.6)

    def test_invalid_levels(self):
        params = RateFunctionParams(1.0, rho_plus=2.0, rho_minus=0.5)
        with pytest.raises(DomainError):
            chernoff_upper(params, 4.0, 10, 1.5)
        with pytest.raises(DomainError):
            chernoff_lower(params, 4.0, 10, 0.8)

    def test_envelope_from_means(self):
        params = RateFunctionParams.from_means(np.array([0.5, 1.0, 2.0]))
        assert (params.rho_minus, params.rho_plus) == (0.5, 2.0)
        assert params.k_plus == 16.0


class TestComparisonLemmas:
    def test_mn_constant(self):
        assert mn_bound_constant(0.5, 0.5) == 16.0
        assert mn_bound_constant(1.0, 1.0) == 4.0
        with pytest.raises(DomainError):
            mn_bound_constant(1.5, 0.5)

    def test_mn_bound_grid(self):
        constant = mn_bound_constant(0.5, 0.25)
        for u in np.linspace(0.5, 2.0, 9):
            for v in np.linspace(0.25, 8.0, 17):
                assert verify_mn_bound(float(u), float(v), 4.0, constant)

    def test_quadratic_comparison(self):
        for z in np.linspace(0.51, 10.0, 50):
            assert rate_comparison_quadratic(1.0, float(z))
        with pytest.raises(DomainError):
            rate_comparison_quadratic(1.0, 0.5)

    def test_scaled_comparison(self):
        for a in np.linspace(4.0, 40.0, 20):
            assert rate_comparison_scaled(1.0, 2.0, float(a))
        with pytest.raises(DomainError):
            rate_comparison_scaled(1.0, 2.0, 3.0)


class TestTiltedRate:
    # the stationary point is the maximum and 1/6 bounds it
    def test_named_case(self):
        z_star, bound = tilted_rate_max(2.0, 1.0, 0.5, 1.0)
        assert z_star == pytest.approx(2.0 / 3.0)
        assert bound == pytest.approx(1.0 / 6.0)
        peak = tilted_rate(z_star, 2.0, 1.0, 0.5, 1.0)
        assert peak == pytest.approx(0.1438, abs=1e-4)
        grid = np.geomspace(0.05, 20.0, 2001)
        assert np.max(tilted_rate(grid, 2.0, 1.0, 0.5, 1.0)) <= peak + 1e-12

    def test_invalid_tilt(self):
        with pytest.raises(DomainError):
            tilted_rate_max(1.0, 2.0, 0.9, 1.0)
        with pytest.raises(DomainError):
            tilted_rate(0.0, 2.0, 1.0, 0.5, 1.0)


class TestRelativeEntropy:
    def test_zero_for_equal_profiles(self):
        profile = DensityProfile([0.5, 1.0, 2.0])
        assert relative_entropy_geometric_products(profile, profile, 4.0) == 0.0

    # one site reduces to the geometric rate function
    def test_single_site(self):
        value = relative_entropy_geometric_products(
            DensityProfile([1.0]), DensityProfile([0.5]), 2.0
        )
        assert value == pytest.approx(rate_geometric(1.0, 2.0))

    # E[log dmu1/dmu2] under mu1 on four sites, within 3 standard errors
    def test_sampled_log_likelihood_ratio(self):
        nalpha = 2.0
        p1 = DensityProfile([1.2, 0.8, 1.0, 1.5])
        p2 = DensityProfile([1.0, 1.0, 0.7, 1.2])
        rng = np.random.default_rng(23)
        size = 400_000
        ratio = np.zeros(size)
        for m1, m2 in zip(p1.values * nalpha, p2.values * nalpha):
            draws = GeometricLaw(float(m1)).sample(rng, size)
            ratio += GeometricLaw(float(m1)).log_pmf(draws)
            ratio -= GeometricLaw(float(m2)).log_pmf(draws)
        exact = relative_entropy_geometric_products(p1, p2, nalpha)
        error = ratio.std() / np.sqrt(size)
        assert exact > 0.0
        assert abs(ratio.mean() - exact) <= 3.0 * error

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            relative_entropy_geometric_products(
                DensityProfile([1.0]), DensityProfile([1.0, 1.0]), 2.0
            )

    def test_entropy_inequality(self):
        p1 = DensityProfile([1.2, 0.8, 1.0, 1.1])
        p2 = DensityProfile([1.0, 1.0, 1.0, 1.0])
        coefficients = np.array([0.1, -0.2, 0.05, 0.0])
        lhs, rhs = entropy_inequality(p1, p2, coefficients, 4.0, 1.0)
        assert lhs == pytest.approx(4.0 * np.dot(coefficients, p1.values))
        assert lhs <= rhs

    def test_entropy_inequality_divergent(self):
        p = DensityProfile([1.0, 1.0])
        _, rhs = entropy_inequality(p, p, np.array([10.0, 0.0]), 4.0, 1.0)
        assert rhs == INFINITY


class TestCutoffBound:
    def test_value(self):
        params = ScalingParams(16, 0.5)
        value = cutoff_bound(1.0, 1.0, params, 0.5, 1.0, 0.5)
        expected = 16.0 * 4.0 * math.exp(-4.0 * rate_exponential(1.0, 0.5))
        assert value == pytest.approx(expected)

    def test_requires_smaller_eps0(self):
        with pytest.raises(DomainError):
            cutoff_bound(1.0, 1.0, ScalingParams(16, 0.5), 0.5, 0.5, 0.5)
