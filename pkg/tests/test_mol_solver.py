"""Test the method-of-lines solver."""

import numpy as np
import pytest

from conftest import sine
from fdehydro.const import INFINITY, NONLINEARITY_FAST
from fdehydro.exceptions import (
    DomainError,
    GridMismatchError,
    SizeMismatchError,
    StiffnessFailureError,
    ZeroDensityError,
)
from fdehydro.lattice import DensityProfile, ScalingParams
from fdehydro.mol_solver import (
    IntegratorOptions,
    MolProblem,
    discrete_laplacian,
    energy,
    energy_dissipation_rate,
    f_field,
    holder_constant,
    integrate,
    mol_rhs,
    poincare_holds,
    psi_energy,
    psi_field,
    psi_time_derivative,
    psi_window,
    reference_fde_solve,
    sup_error,
    time_derivative_bound,
    time_window,
)


def _flow_derivative(func, u, params, h=1e-7):
    """Central difference of func along the flow direction."""
    direction = mol_rhs(u, params)
    return (func(u + h * direction, params) - func(u - h * direction, params)) / (2 * h)


class TestFields:
    def test_laplacian_of_cosine(self):
        n = 256
        x = np.arange(n) / n
        lap = discrete_laplacian(np.cos(2 * np.pi * x), n)
        expected = -4 * np.pi**2 * np.cos(2 * np.pi * x)
        assert np.max(np.abs(lap - expected)) <= 1e-3 * 4 * np.pi**2

    def test_laplacian_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            discrete_laplacian(np.ones(4), 5)

    # the right-hand side is a discrete divergence
    def test_rhs_conserves_mass(self, small_params, sine_profile):
        assert mol_rhs(sine_profile(16), small_params).sum() == pytest.approx(
            0.0, abs=1e-9
        )

    def test_constant_profile_is_stationary(self, small_params):
        u = DensityProfile.constant(1.3, 16)
        assert np.all(mol_rhs(u, small_params) == 0.0)
        assert energy(u, small_params) == 0.0
        assert time_window(u, small_params) == (INFINITY, 0.0, 1.3)
        assert psi_window(u, small_params) == (INFINITY, 0.0)

    # dE/dt along the flow matches the closed form and is negative
    def test_energy_dissipation(self, small_params, sine_profile):
        u = sine_profile(16).values
        numeric = _flow_derivative(energy, u, small_params)
        exact = energy_dissipation_rate(u, small_params)
        assert exact < 0.0
        assert numeric == pytest.approx(exact, rel=1e-5)

    def test_psi_time_derivative(self, small_params, sine_profile):
        u = sine_profile(16).values
        numeric = _flow_derivative(psi_field, u, small_params, h=1e-6)
        exact = psi_time_derivative(u, small_params)
        assert np.max(np.abs(numeric - exact)) <= 1e-4 * np.max(np.abs(exact))

    def test_energy_by_hand(self):
        params = ScalingParams(2, 0.0)
        assert energy(DensityProfile([1.0, 3.0]), params) == pytest.approx(0.25)

    # n=4, n^alpha=1, u=[1,2,1,2]: psi(0)=4/3 and F(0)=32/3
    def test_fields_by_hand(self):
        params = ScalingParams(4, 0.0)
        u = DensityProfile([1.0, 2.0, 1.0, 2.0])
        assert psi_field(u, params)[0] == pytest.approx(4.0 / 3.0)
        assert f_field(u, params)[0] == pytest.approx(32.0 / 3.0)

    # the discrete flow is the fast flow shifted by n^-alpha
    def test_shift_identity(self, small_params, sine_profile):
        u = sine_profile(16).values
        shift = small_params.inverse_n_alpha
        assert mol_rhs(u, small_params) == pytest.approx(
            mol_rhs(u + shift, small_params, NONLINEARITY_FAST), rel=1e-9, abs=1e-9
        )

    def test_psi_energy_non_negative(self, small_params, sine_profile):
        assert psi_energy(sine_profile(16), small_params) > 0.0

    def test_f_field_zero_density(self, small_params):
        u = np.ones(16)
        u[3] = 0.0
        with pytest.raises(ZeroDensityError) as excinfo:
            f_field(u, small_params)
        assert excinfo.value.site == 3

    def test_fast_nonlinearity(self, small_params, sine_profile):
        u = sine_profile(16).values
        expected = discrete_laplacian(-1.0 / u, 16)
        assert mol_rhs(u, small_params, NONLINEARITY_FAST) == pytest.approx(expected)


class TestWindows:
    def test_time_window_formula(self, small_params, sine_profile):
        u = sine_profile(16)
        window, psi_bar, u_bar = time_window(u, small_params)
        assert u_bar == pytest.approx(1.5)
        assert window == pytest.approx(1.0 / (4 * psi_bar * (0.25 + u_bar)))

    # sup |psi_t| <= 2 Psi0 and |du/dt| stays below its bound up to T0
    def test_psi_window_bound_holds(self, small_params, sine_profile):
        u0 = sine_profile(16)
        horizon, psi0 = psi_window(u0, small_params)
        assert psi0 == pytest.approx(np.max(np.abs(psi_field(u0, small_params))))
        times = list(np.linspace(0.0, horizon, 9))
        solution = integrate(MolProblem(small_params, u0), horizon, times)
        bound = time_derivative_bound(u0, small_params)
        for u in solution.profiles:
            assert np.max(np.abs(psi_field(u, small_params))) <= 2 * psi0
            assert np.max(np.abs(mol_rhs(u, small_params))) <= bound

    def test_holder_constant(self):
        assert holder_constant(np.ones(8)) == 0.0
        assert holder_constant(np.array([0.0, 1.0])) == pytest.approx(np.sqrt(2.0))

    def test_poincare_random_profiles(self, small_params):
        rng = np.random.default_rng(3)
        for _ in range(200):
            assert poincare_holds(rng.uniform(0.01, 3.0, 16), small_params)


class TestIntegrate:
    def test_mass_energy_and_bounds(self, small_params, sine_profile):
        u0 = sine_profile(16)
        times = list(np.linspace(0.0, 0.01, 6))
        solution = integrate(MolProblem(small_params, u0), 0.01, times)
        assert solution.times.tolist() == pytest.approx(times)
        assert solution.mass_drift() <= 1e-10
        frame = solution.diagnostics_frame()
        assert np.all(np.diff(frame["energy"]) <= 1e-9)
        assert frame["min"].min() >= u0.values.min() - 1e-12
        assert frame["max"].max() <= u0.values.max() + 1e-12
        assert solution.evaluations > 0
        assert len(solution.to_frame()) == 16 * 6

    def test_zero_horizon(self, small_params, sine_profile):
        solution = integrate(MolProblem(small_params, sine_profile(16)), 0.0, [])
        assert solution.times.tolist() == [0.0]
        assert solution.profiles[0] == pytest.approx(sine_profile(16).values)

    def test_evaluation_budget(self, sine_profile):
        params = ScalingParams(64, 0.5)
        problem = MolProblem(
            params, sine_profile(64), IntegratorOptions(max_evaluations=5)
        )
        with pytest.raises(StiffnessFailureError):
            integrate(problem, 0.01, [])

    def test_invalid_problems(self, small_params, sine_profile):
        with pytest.raises(DomainError):
            IntegratorOptions(method="BDF")
        with pytest.raises(SizeMismatchError):
            MolProblem(small_params, sine_profile(8))
        with pytest.raises(DomainError):
            MolProblem(
                small_params,
                DensityProfile(np.zeros(16)),
                nonlinearity=NONLINEARITY_FAST,
            )


class TestReference:
    def test_constant_reference(self):
        reference = reference_fde_solve(
            lambda x: np.full_like(x, 2.0), 32, 0.01, [0.0, 0.01]
        )
        assert reference.profiles[-1] == pytest.approx(np.full(32, 2.0))

    # errors against the fine grid shrink as n grows
    def test_sup_error_decreases(self):
        times = [0.0, 0.001, 0.002]
        reference = reference_fde_solve(sine, 256, 0.002, times)
        errors = []
        for n in (16, 32, 64):
            params = ScalingParams(n, 0.5)
            u0 = DensityProfile.from_function(sine, n)
            solution = integrate(MolProblem(params, u0), 0.002, times)
            errors.append(sup_error(solution, reference))
        assert errors[0] > errors[1] > errors[2]

    def test_grid_mismatch(self, sine_profile):
        params = ScalingParams(16, 0.5)
        solution = integrate(MolProblem(params, sine_profile(16)), 0.001, [0.0, 0.001])
        with pytest.raises(GridMismatchError):
            sup_error(solution, reference_fde_solve(sine, 24, 0.001, [0.0, 0.001]))
        with pytest.raises(GridMismatchError):
            sup_error(
                solution, reference_fde_solve(sine, 32, 0.001, [0.0, 0.0005, 0.001])
            )
