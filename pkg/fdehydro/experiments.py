"""Experiment runners.

Each runner fills a ResultBundle with CSV tables, named pass/fail checks,
scalar metrics and plot specs.  Replica workers are module-level functions so
the process pool can pickle them.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .const import (
    COMPARISON_TOL,
    ENERGY_TOL,
    EXPERIMENT_ATTRACTIVENESS,
    EXPERIMENT_CONCENTRATION,
    EXPERIMENT_ENTROPY_DECAY,
    EXPERIMENT_EQUIVALENCE,
    EXPERIMENT_HYDRO_LIMIT,
    EXPERIMENT_MAX_PRINCIPLE,
    EXPERIMENT_MOL_CONVERGENCE,
    EXPERIMENT_ONE_BLOCK,
    EXPERIMENT_RATE_LEMMAS,
    EXPERIMENT_SPECTRAL_GAP,
    GAP_EXACT_TOL,
    MASS_DRIFT_TOL,
    MAX_PRINCIPLE_TOL,
    SUMMARY_FILE,
    TEST_FUNCTION_COS,
    TEST_FUNCTION_ONE,
    __version__,
)
from .ensemble import (
    canonical_expectation_closed_form,
    canonical_expectation_g,
    enumerate_canonical,
    gap_table,
    kernel_dimension,
)
from .exceptions import ConfigError, OrderViolationError
from .experiment_config import TEST_FUNCTION_MAP, ExperimentConfig, ProfileSpec
from .lattice import DensityProfile, RngStream, ScalingParams, partial_order_leq
from .measures import (
    RateFunctionParams,
    chernoff_lower,
    chernoff_upper,
    entropy_inequality,
    legendre_rate_geometric,
    mn_bound_constant,
    rate_comparison_quadratic,
    rate_comparison_scaled,
    rate_exponential,
    rate_geometric,
    relative_entropy_geometric_products,
    sample_block_sum,
    tilted_rate,
    tilted_rate_max,
    verify_mn_bound,
)
from .mol_solver import (
    MolProblem,
    MolSolution,
    holder_constant,
    integrate,
    poincare_holds,
    psi_window,
    reference_fde_solve,
    sup_error,
    time_window,
)
from .plots import PlotSpec
from .replica_pool import ReplicaPool
from .util import write_json, write_table
from .zero_range import (
    CoupledState,
    SimState,
    empirical_pairing,
    one_block_statistic,
    sample_ordered_pair,
    simulate,
    simulate_coupled,
    time_integrated_one_block,
)

LOG = logging.getLogger(__name__)


@dataclass(slots=True)
class ResultBundle:
    """Everything one experiment run produced."""

    config: ExperimentConfig
    output_dir: Path
    tables: dict[str, Path] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)
    checks: dict[str, bool] = field(default_factory=dict)
    plots: list[PlotSpec] = field(default_factory=list)
    version: str = __version__

    @property
    def seed(self) -> int:
        """Return the root seed."""
        return self.config.seed

    @property
    def passed(self) -> bool:
        """Return whether the run has checks and all of them passed."""
        return bool(self.checks) and all(self.checks.values())

    def add_table(self, name: str, frame: pd.DataFrame) -> Path:
        """Write a table as <name>.csv and register it."""
        path = write_table(frame, self.output_dir / f"{name}.csv")
        self.tables[name] = path
        return path

    def check(self, name: str, ok: bool) -> bool:
        """Record a named pass/fail check."""
        self.checks[name] = bool(ok)
        if ok:
            LOG.info("check %s passed", name)
        else:
            LOG.warning("check %s FAILED", name)
        return bool(ok)

    def summary(self) -> dict[str, Any]:
        """Return the JSON summary."""
        return {
            "experiment": self.config.experiment,
            "version": self.version,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "metrics": self.metrics,
            "checks": dict(self.checks),
            "passed": self.passed,
            "tables": {name: path.name for name, path in self.tables.items()},
            "plots": [spec.filename for spec in self.plots],
        }

    def write_summary(self) -> Path:
        """Write summary.json into the output directory."""
        return write_json(self.summary(), self.output_dir / SUMMARY_FILE)


def _decreasing(values: list[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _decreasing_trend(means: list[float], stds: list[float], counts: list[int]) -> bool:
    # no significant increase at 2 sigma, and an overall decrease
    for i in range(len(means) - 1):
        sigma = math.sqrt(
            stds[i] ** 2 / counts[i] + stds[i + 1] ** 2 / counts[i + 1]
        )
        if means[i + 1] - means[i] >= 2.0 * sigma:
            return False
    return means[-1] < means[0]


def _energy_increase(solution: MolSolution) -> float:
    energies = solution.diagnostics_frame()["energy"].to_numpy()
    if energies.size < 2:
        return 0.0
    return float(np.max(np.diff(energies)))


# ---------------------------------------------------------------- workers


def _solve_size(
    n: int, alpha: float, profile: ProfileSpec, t_end: float, times: list[float]
) -> MolSolution:
    params = ScalingParams(n, alpha)
    u0 = DensityProfile.from_function(profile.function(), n)
    return integrate(MolProblem(params, u0), t_end, times)


def _max_principle_run(
    n: int, alpha: float, t_end: float, times: list[float], stream: RngStream
) -> dict[str, float]:
    params = ScalingParams(n, alpha)
    gen = stream.generator
    u0 = gen.uniform(0.5, 1.5, n)
    v0 = u0 + gen.uniform(0.0, 0.5, n)
    lower = integrate(MolProblem(params, DensityProfile(u0)), t_end, times)
    upper = integrate(MolProblem(params, DensityProfile(v0)), t_end, times)
    return {
        "mass_drift": max(lower.mass_drift(), upper.mass_drift()),
        "min_margin": float(np.min(lower.profiles.min(axis=1) - u0.min())),
        "max_margin": float(np.max(lower.profiles.max(axis=1) - u0.max())),
        "comparison_margin": float(np.max(lower.profiles - upper.profiles)),
        "energy_increase": max(_energy_increase(lower), _energy_increase(upper)),
    }


def _hydro_replica(
    n: int,
    alpha: float,
    profile: ProfileSpec,
    t_end: float,
    function_names: list[str],
    stream: RngStream,
) -> dict[str, Any]:
    params = ScalingParams(n, alpha)
    u0 = DensityProfile.from_function(profile.function(), n)
    state = SimState.from_profile(u0, params, stream)
    functions = [TEST_FUNCTION_MAP[name] for name in function_names]
    initial = [empirical_pairing(state.config, f, params) for f in functions]
    record = simulate(state, t_end, [], keep_snapshots=False)
    final = [empirical_pairing(state.config, f, params) for f in functions]
    return {"initial": initial, "final": final, "events": record.event_count}


def _one_block_replica(
    n: int,
    alpha: float,
    rho: float,
    ell: int,
    function_name: str,
    cutoff: float,
    t_end: float,
    stream: RngStream,
) -> dict[str, float]:
    params = ScalingParams(n, alpha)
    state = SimState.from_profile(DensityProfile.constant(rho, n), params, stream)
    f_values = np.asarray(
        TEST_FUNCTION_MAP[function_name](np.arange(n) / n), dtype=np.float64
    )
    result = time_integrated_one_block(state, t_end, ell, f_values, cutoff)
    first, second = one_block_statistic(state.config, ell, f_values, params, cutoff)
    return {
        "first": abs(result.first) / t_end,
        "second": abs(result.second) / t_end,
        "consistency_gap": max(
            abs(first - result.final_first), abs(second - result.final_second)
        ),
        "events": float(result.events),
    }


def _coupled_replica(
    n: int,
    alpha: float,
    profile: ProfileSpec,
    shift: float,
    events: int,
    checkpoints: int,
    stream: RngStream,
) -> dict[str, Any]:
    params = ScalingParams(n, alpha)
    lower_profile = DensityProfile.from_function(profile.function(), n)
    upper_profile = DensityProfile(lower_profile.values + shift)
    lower, upper = sample_ordered_pair(lower_profile, upper_profile, params, stream)
    coupled = CoupledState.from_configurations(lower, upper, params, stream)
    occupied = max(1, len(upper.occupied))
    t_end = events / (params.jump_rate * occupied)
    times = [float(t) for t in np.linspace(0.0, t_end, checkpoints)]
    try:
        low_record, up_record = simulate_coupled(coupled, t_end, times)
    except OrderViolationError as ex:
        return {
            "violations": ex.violations,
            "events": 0,
            "ordered": 0,
            "conserved": False,
        }
    ordered = sum(
        partial_order_leq(a, b) for a, b in zip(low_record.snapshots, up_record.snapshots)
    )
    conserved = all(s.total == lower.total for s in low_record.snapshots) and all(
        s.total == upper.total for s in up_record.snapshots
    )
    return {
        "violations": 0,
        "events": up_record.event_count,
        "ordered": int(ordered),
        "conserved": conserved,
    }


# ---------------------------------------------------------------- runners


def _run_mol_convergence(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    u0 = config.profile.function()
    n_values = sorted(config.n_values)
    windows = {}
    for n in n_values:
        params = ScalingParams(n, config.alpha)
        profile = DensityProfile.from_function(u0, n)
        windows[n] = (time_window(profile, params), psi_window(profile, params))
    horizon = min([config.time_cap] + [w[0][0] for w in windows.values()])
    times = config.checkpoint_times(horizon)
    LOG.info("mol-convergence horizon t*=%s", horizon)

    reference = reference_fde_solve(u0, config.reference_size, horizon, times)
    bundle.add_table("reference_diagnostics", reference.diagnostics_frame())
    if config.reference_size % 2 == 0 and config.reference_size // 2 >= 2:
        coarse = reference_fde_solve(u0, config.reference_size // 2, horizon, times)
        bundle.metrics["reference_self_error"] = sup_error(coarse, reference)

    solutions = pool.map(
        _solve_size, [(n, config.alpha, config.profile, horizon, times) for n in n_values]
    )
    rows = []
    for n, solution in zip(n_values, solutions):
        diagnostics = solution.diagnostics_frame()
        bundle.add_table(f"diagnostics_n{n}", diagnostics)
        (window, psi_bar, _), (psi_horizon, psi0) = windows[n]
        within = diagnostics["time"] <= psi_horizon
        rows.append(
            {
                "n": n,
                "sup_error": sup_error(solution, reference),
                "mass_drift": solution.mass_drift(),
                "energy_increase": _energy_increase(solution),
                "time_window": window,
                "psi_bar": psi_bar,
                "psi0": psi0,
                "sup_psi": float(diagnostics.loc[within, "sup_psi"].max()),
                "sup_f": float(diagnostics["sup_f"].max()),
                "holder_constant": max(holder_constant(u) for u in solution.profiles),
                "evaluations": solution.evaluations,
            }
        )
    table = pd.DataFrame(rows)
    bundle.add_table("convergence", table)

    errors = table["sup_error"].tolist()
    bundle.metrics["horizon"] = horizon
    bundle.metrics["sup_errors"] = dict(zip(map(str, n_values), errors))
    bundle.metrics["reduction"] = errors[0] / errors[-1] if errors[-1] > 0 else math.inf
    bundle.metrics["fitted_holder_constant"] = float(table["holder_constant"].max())
    bundle.metrics["fitted_f_bound"] = float(table["sup_f"].max())
    bundle.check("sup_error_decreasing", _decreasing(errors))
    bundle.check(
        "sup_error_reduction", errors[-1] <= errors[0] / config.min_reduction
    )
    bundle.check("mass_conserved", bool((table["mass_drift"] <= MASS_DRIFT_TOL).all()))
    bundle.check(
        "energy_nonincreasing", bool((table["energy_increase"] <= ENERGY_TOL).all())
    )
    bundle.check(
        "psi_window_bound",
        bool((table["sup_psi"] <= 2.0 * table["psi0"] * (1.0 + 1e-9)).all()),
    )
    bundle.plots.append(
        PlotSpec(
            "convergence",
            "convergence",
            "n",
            ("sup_error",),
            logx=True,
            logy=True,
            title="sup error against the fine-grid solution",
        )
    )


def _run_max_principle(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    n = config.n_values[0]
    times = config.checkpoint_times()
    streams = rng.spawn(config.pairs + 1)
    runs = pool.map(
        _max_principle_run,
        [(n, config.alpha, config.t_end, times, s) for s in streams[:-1]],
    )
    table = pd.DataFrame(runs)
    table.insert(0, "run", np.arange(len(runs)))
    bundle.add_table("max_principle", table)

    params = ScalingParams(n, config.alpha)
    gen = streams[-1].generator
    poincare_failures = sum(
        not poincare_holds(gen.uniform(0.01, 3.0, n), params)
        for _ in range(config.samples)
    )
    bundle.metrics["poincare_samples"] = config.samples
    bundle.metrics["poincare_failures"] = poincare_failures
    bundle.metrics["worst_comparison_margin"] = float(table["comparison_margin"].max())
    bundle.check("mass_conserved", bool((table["mass_drift"] <= MASS_DRIFT_TOL).all()))
    bundle.check(
        "weak_maximum_principle",
        bool(
            (table["min_margin"] >= -MAX_PRINCIPLE_TOL).all()
            and (table["max_margin"] <= MAX_PRINCIPLE_TOL).all()
        ),
    )
    bundle.check(
        "comparison_principle", bool((table["comparison_margin"] <= COMPARISON_TOL).all())
    )
    bundle.check(
        "energy_nonincreasing", bool((table["energy_increase"] <= ENERGY_TOL).all())
    )
    bundle.check("poincare_inequality", poincare_failures == 0)
    bundle.plots.append(
        PlotSpec(
            "max_principle",
            "max_principle",
            "run",
            ("min_margin", "max_margin", "comparison_margin"),
            title="maximum and comparison principle margins",
        )
    )


def _run_equivalence(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    rows = []
    for ell in range(1, config.max_ell + 1):
        for k in range(config.max_k + 1):
            brute = canonical_expectation_g(ell, k)
            closed = canonical_expectation_closed_form(ell, k)
            rows.append(
                {
                    "ell": ell,
                    "k": k,
                    "size": len(enumerate_canonical(ell, k)),
                    "brute_force": float(brute),
                    "closed_form": float(closed),
                    "exact": str(brute),
                    "match": brute == closed,
                }
            )
    table = pd.DataFrame(rows)
    bundle.add_table("equivalence", table)
    bundle.metrics["boxes"] = len(rows)
    bundle.check("equivalence_exact", bool(table["match"].all()))
    bundle.plots.append(
        PlotSpec(
            "equivalence",
            "equivalence",
            "k",
            ("brute_force",),
            group="ell",
            title="canonical mean of g(eta(1))",
        )
    )


def _run_spectral_gap(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    table = gap_table(config.max_sum)
    table["kernel_dimension"] = [
        kernel_dimension(enumerate_canonical(int(ell), int(k)))
        for ell, k in zip(table["ell"], table["k"])
    ]
    bundle.add_table("spectral_gap", table)
    smallest = table.loc[(table["ell"] == 2) & (table["k"] == 1), "gap"]
    min_scaled = float(table["scaled_gap"].min())
    bundle.metrics["kappa0_inverse_estimate"] = min_scaled
    bundle.metrics["kappa0_estimate"] = 1.0 / min_scaled if min_scaled > 0 else math.inf
    bundle.check("gaps_positive", bool((table["gap"] > 0.0).all()))
    bundle.check(
        "gap_two_sites_one_particle",
        len(smallest) == 1 and abs(float(smallest.iloc[0]) - 2.0) <= GAP_EXACT_TOL,
    )
    bundle.check("irreducible", bool((table["kernel_dimension"] == 1).all()))
    bundle.check("scaled_gap_positive", min_scaled > 0.0)
    bundle.plots.append(
        PlotSpec(
            "spectral_gap",
            "spectral_gap",
            "k",
            ("scaled_gap",),
            group="ell",
            title="gap (ell + k)^2",
        )
    )


def _run_concentration(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    params = RateFunctionParams(config.rho)
    sums = sample_block_sum(
        np.full(config.ell, config.rho), config.nalpha, config.replicas, rng.generator
    )
    rows = []
    for side, levels in (("upper", config.upper_levels), ("lower", config.lower_levels)):
        for a in levels:
            threshold = config.ell * a * config.nalpha
            if side == "upper":
                hits = sums >= threshold
                bound = chernoff_upper(params, config.nalpha, config.ell, a)
            else:
                hits = sums <= threshold
                bound = chernoff_lower(params, config.nalpha, config.ell, a)
            frequency = float(hits.mean())
            rows.append(
                {
                    "side": side,
                    "a": a,
                    "threshold": threshold,
                    "empirical": frequency,
                    "stderr": math.sqrt(frequency * (1.0 - frequency) / sums.size),
                    "bound": bound,
                    "holds": frequency <= bound,
                }
            )
    table = pd.DataFrame(rows)
    bundle.add_table("concentration", table)
    bundle.metrics["samples"] = int(sums.size)
    bundle.check("chernoff_bounds_hold", bool(table["holds"].all()))
    bundle.plots.append(
        PlotSpec(
            "concentration",
            "concentration",
            "a",
            ("empirical", "bound"),
            logy=True,
            title="tail frequency against the Chernoff bound",
        )
    )


def _lemma_row(lemma: str, points: int, violations: int) -> dict[str, Any]:
    return {"lemma": lemma, "points": points, "violations": violations}


def _rate_lemma_rows(config: ExperimentConfig, gen: np.random.Generator) -> list[dict]:
    rows = []

    # |M_n(u, v)| <= C I_u(v)
    constant = mn_bound_constant(config.eps, config.eps0)
    u_grid = np.linspace(config.eps, 1.0 / config.eps, 40)
    v_grid = np.linspace(config.eps0, 10.0, 40)
    checks = [
        verify_mn_bound(float(u), float(v), nalpha, constant)
        for nalpha in (1.0, 4.0, 32.0)
        for u in u_grid
        for v in v_grid
    ]
    rows.append(_lemma_row("mn_bound", len(checks), checks.count(False)))

    rhos = (0.5, 1.0, 2.0)
    checks = [
        rate_comparison_quadratic(rho, float(z))
        for rho in rhos
        for z in np.linspace(0.5 * rho * (1.0 + 1e-6), 10.0 * rho, 300)
    ]
    rows.append(_lemma_row("rate_quadratic", len(checks), checks.count(False)))

    checks = []
    for rho in rhos:
        for rho_plus in (rho, 1.5 * rho, 2.0 * rho):
            k_plus = (rho_plus / rho) ** 2
            for a in np.linspace(k_plus * rho, 20.0 * rho, 111):
                checks.append(rate_comparison_scaled(rho, rho_plus, float(a)))
    rows.append(_lemma_row("rate_scaled", len(checks), checks.count(False)))

    # concave in z, so the maximum sits at the stationary point
    violations = 0
    trials = config.samples
    for _ in range(trials):
        rho = float(gen.uniform(0.5, 2.0))
        ratio = float(gen.uniform(0.75, 1.5))
        kappa_tilde = float(gen.uniform(0.1, 1.0))
        k = float(gen.uniform(0.05, min(0.99, 0.99 / ratio)))
        args = (rho, ratio * rho, k * kappa_tilde, kappa_tilde)
        z_star, bound = tilted_rate_max(*args)
        grid = np.geomspace(z_star / 10.0, z_star * 10.0, 401)
        peak = max(float(np.max(tilted_rate(grid, *args))), tilted_rate(z_star, *args))
        violations += peak > bound + 1e-9
    z_star, bound = tilted_rate_max(2.0, 1.0, 0.5, 1.0)
    violations += tilted_rate(z_star, 2.0, 1.0, 0.5, 1.0) > bound + 1e-9
    rows.append(_lemma_row("tilted_rate", trials + 1, int(violations)))

    violations = 0
    points = 0
    for rho in rhos:
        lambdas = np.linspace(-8.0, math.log1p(1.0 / rho) * (1.0 - 1e-9), 40001)
        for a in np.linspace(0.1 * rho, 5.0 * rho, 25):
            points += 1
            numeric = legendre_rate_geometric(rho, float(a), lambdas)
            violations += abs(numeric - rate_geometric(rho, float(a))) > 1e-5
    rows.append(_lemma_row("legendre_transform", points, int(violations)))

    gaps = [
        abs(rate_geometric(2.0 * m, 4.0 * m) - rate_exponential(2.0, 4.0))
        for m in (10.0, 100.0, 1000.0)
    ]
    scaling_ok = _decreasing(gaps) and gaps[-1] <= 1e-3
    rows.append(_lemma_row("geometric_scaling_limit", 3, int(not scaling_ok)))

    a_grid = np.linspace(0.05, 6.0, 500)
    values = np.array([rate_exponential(1.0, float(a)) for a in a_grid])
    convex = np.diff(values, 2) > 0.0
    nonnegative = values >= 0.0
    rows.append(
        _lemma_row(
            "exponential_rate_convex",
            int(convex.size + nonnegative.size),
            int((~convex).sum() + (~nonnegative).sum()),
        )
    )
    return rows


def _run_rate_lemmas(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    table = pd.DataFrame(_rate_lemma_rows(config, rng.generator))
    bundle.add_table("rate_lemmas", table)
    a_grid = np.linspace(0.1, 4.0, 79)
    curves = {
        "a": a_grid,
        "exponential": [rate_exponential(1.0, float(a)) for a in a_grid],
    }
    for m in (1.0, 10.0, 100.0):
        curves[f"geometric_m{int(m)}"] = [
            rate_geometric(m, float(a) * m) for a in a_grid
        ]
    bundle.add_table("rate_curves", pd.DataFrame(curves))
    bundle.metrics["points"] = int(table["points"].sum())
    bundle.metrics["violations"] = int(table["violations"].sum())
    for row in table.itertuples():
        bundle.check(f"{row.lemma}_holds", row.violations == 0)
    bundle.plots.append(
        PlotSpec(
            "rate_curves",
            "rate_curves",
            "a",
            ("exponential", "geometric_m1", "geometric_m10", "geometric_m100"),
            title="rate functions at mean 1",
        )
    )


def _integral_against(reference: MolSolution, func: Callable) -> float:
    grid = np.arange(reference.n) / reference.n
    return float(np.mean(reference.profiles[-1] * func(grid)))


def _run_hydro_limit(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    u0 = config.profile.function()
    names = list(config.test_functions)
    reference = reference_fde_solve(
        u0, config.reference_size, config.t_end, [0.0, config.t_end]
    )
    targets = {
        name: _integral_against(reference, TEST_FUNCTION_MAP[name]) for name in names
    }
    n_values = sorted(config.n_values)
    size_streams = rng.spawn(len(n_values))
    rows, replica_rows = [], []
    for n, size_stream in zip(n_values, size_streams):
        results = pool.map(
            _hydro_replica,
            [
                (n, config.alpha, config.profile, config.t_end, names, s)
                for s in size_stream.spawn(config.replicas)
            ],
        )
        params = ScalingParams(n, config.alpha)
        means = params.n_alpha * u0(np.arange(n) / n)
        sigma = math.sqrt(float(np.sum(means * (1.0 + means)))) / (n * params.n_alpha)
        for j, name in enumerate(names):
            signed = np.array([r["final"][j] for r in results]) - targets[name]
            for i, value in enumerate(signed):
                replica_rows.append(
                    {"n": n, "function": name, "replica": i, "error": abs(value)}
                )
                if config.detailed_debug_logging:
                    LOG.debug("n=%d F=%s replica %d error %s", n, name, i, value)
            rows.append(
                {
                    "n": n,
                    "function": name,
                    "target": targets[name],
                    "error": float(np.mean(np.abs(signed))),
                    "error_std": float(np.std(np.abs(signed), ddof=1))
                    if signed.size > 1
                    else 0.0,
                    "signed_mean": float(np.mean(signed)),
                    "sigma_clt": sigma,
                    "events_mean": float(np.mean([r["events"] for r in results])),
                }
            )
        LOG.info("hydro-limit n=%d done", n)
    table = pd.DataFrame(rows)
    bundle.add_table("hydro_limit", table)
    bundle.add_table("hydro_replicas", pd.DataFrame(replica_rows))
    bundle.metrics["targets"] = targets
    for name in names:
        part = table[table["function"] == name]
        bundle.check(f"error_decreasing_{name}", _decreasing(part["error"].tolist()))
    if TEST_FUNCTION_ONE in names:
        part = table[table["function"] == TEST_FUNCTION_ONE]
        bound = 3.0 * part["sigma_clt"] / math.sqrt(config.replicas)
        bundle.check(
            "mass_pairing_within_clt",
            bool((part["signed_mean"].abs() <= bound).all()),
        )
    bundle.plots.append(
        PlotSpec(
            "hydro_limit",
            "hydro_limit",
            "n",
            ("error",),
            group="function",
            logx=True,
            logy=True,
            title="pairing error against the limit equation",
            scatter_table="hydro_replicas",
            scatter_column="error",
        )
    )


def _run_one_block(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    n_values = sorted(config.n_values)
    function_name = config.test_functions[0]
    rows, replica_rows = [], []
    for n, size_stream in zip(n_values, rng.spawn(len(n_values))):
        ell = config.block_size(n)
        results = pool.map(
            _one_block_replica,
            [
                (
                    n,
                    config.alpha,
                    config.rho,
                    ell,
                    function_name,
                    config.cutoff,
                    config.t_end,
                    s,
                )
                for s in size_stream.spawn(config.replicas)
            ],
        )
        frame = pd.DataFrame(results)
        frame.insert(0, "replica", np.arange(len(results)))
        frame.insert(0, "n", n)
        replica_rows.append(frame)
        rows.append(
            {
                "n": n,
                "ell": ell,
                "first": float(frame["first"].mean()),
                "first_std": float(frame["first"].std(ddof=1)) if len(frame) > 1 else 0.0,
                "second": float(frame["second"].mean()),
                "second_std": float(frame["second"].std(ddof=1))
                if len(frame) > 1
                else 0.0,
                "consistency_gap": float(frame["consistency_gap"].max()),
                "events_mean": float(frame["events"].mean()),
            }
        )
        LOG.info("one-block n=%d ell=%d done", n, ell)
    table = pd.DataFrame(rows)
    bundle.add_table("one_block", table)
    bundle.add_table("one_block_replicas", pd.concat(replica_rows, ignore_index=True))
    counts = [config.replicas] * len(rows)
    for column in ("first", "second"):
        bundle.check(
            f"{column}_statistic_decreasing",
            len(rows) < 2
            or _decreasing_trend(
                table[column].tolist(), table[f"{column}_std"].tolist(), counts
            ),
        )
    bundle.check(
        "incremental_sums_consistent", bool((table["consistency_gap"] <= 1e-6).all())
    )
    bundle.metrics["test_function"] = function_name
    bundle.plots.append(
        PlotSpec(
            "one_block",
            "one_block",
            "n",
            ("first", "second"),
            logx=True,
            logy=True,
            title="time-averaged one-block statistics",
        )
    )


def _run_attractiveness(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    n = config.n_values[0]
    results = pool.map(
        _coupled_replica,
        [
            (
                n,
                config.alpha,
                config.profile,
                config.rho,
                config.events,
                config.checkpoints,
                s,
            )
            for s in rng.spawn(config.pairs)
        ],
    )
    table = pd.DataFrame(results)
    table.insert(0, "pair", np.arange(len(results)))
    bundle.add_table("attractiveness", table)
    bundle.metrics["total_events"] = int(table["events"].sum())
    bundle.metrics["total_violations"] = int(table["violations"].sum())
    bundle.check("no_order_violations", int(table["violations"].sum()) == 0)
    bundle.check(
        "ordered_at_checkpoints", bool((table["ordered"] == config.checkpoints).all())
    )
    bundle.check("particles_conserved", bool(table["conserved"].all()))
    bundle.plots.append(
        PlotSpec(
            "attractiveness",
            "attractiveness",
            "pair",
            ("events",),
            title="events per pair",
        )
    )


def _run_entropy_decay(
    config: ExperimentConfig, bundle: ResultBundle, pool: ReplicaPool, rng: RngStream
) -> None:
    u0 = config.profile.function()
    times = [0.0, config.t_end]
    n_values = sorted(config.n_values)
    reference = reference_fde_solve(u0, config.reference_size, config.t_end, times)
    solutions = pool.map(
        _solve_size,
        [(n, config.alpha, config.profile, config.t_end, times) for n in n_values],
    )
    rows = []
    for n, solution in zip(n_values, solutions):
        params = ScalingParams(n, config.alpha)
        stride = config.reference_size // n
        limit_now = DensityProfile(reference.profiles[-1][::stride])
        limit_start = DensityProfile(reference.profiles[0][::stride])
        entropy_start = relative_entropy_geometric_products(
            solution.profile_at(0), limit_start, params.n_alpha
        )
        entropy = relative_entropy_geometric_products(
            solution.profile_at(-1), limit_now, params.n_alpha
        )
        coefficients = TEST_FUNCTION_MAP[TEST_FUNCTION_COS](np.arange(n) / n) / (
            n * params.n_alpha
        )
        lhs, rhs = entropy_inequality(
            solution.profile_at(-1), limit_now, coefficients, params.n_alpha, 1.0
        )
        rows.append(
            {
                "n": n,
                "entropy_per_site": entropy / n,
                "initial_entropy_per_site": entropy_start / n,
                "pairing": lhs,
                "pairing_bound": rhs,
            }
        )
    table = pd.DataFrame(rows)
    bundle.add_table("entropy_decay", table)
    bundle.check("entropy_decreasing", _decreasing(table["entropy_per_site"].tolist()))
    bundle.check(
        "initial_entropy_zero", bool((table["initial_entropy_per_site"] <= 1e-12).all())
    )
    bundle.check(
        "entropy_inequality", bool((table["pairing"] <= table["pairing_bound"]).all())
    )
    bundle.plots.append(
        PlotSpec(
            "entropy_decay",
            "entropy_decay",
            "n",
            ("entropy_per_site",),
            logx=True,
            logy=True,
            title="relative entropy per site",
        )
    )


Runner = Callable[[ExperimentConfig, ResultBundle, ReplicaPool, RngStream], None]

RUNNERS: dict[str, Runner] = {
    EXPERIMENT_MOL_CONVERGENCE: _run_mol_convergence,
    EXPERIMENT_MAX_PRINCIPLE: _run_max_principle,
    EXPERIMENT_EQUIVALENCE: _run_equivalence,
    EXPERIMENT_SPECTRAL_GAP: _run_spectral_gap,
    EXPERIMENT_CONCENTRATION: _run_concentration,
    EXPERIMENT_RATE_LEMMAS: _run_rate_lemmas,
    EXPERIMENT_HYDRO_LIMIT: _run_hydro_limit,
    EXPERIMENT_ONE_BLOCK: _run_one_block,
    EXPERIMENT_ATTRACTIVENESS: _run_attractiveness,
    EXPERIMENT_ENTROPY_DECAY: _run_entropy_decay,
}


def run_experiment(
    config: ExperimentConfig, pool: ReplicaPool | None = None
) -> ResultBundle:
    """Run one experiment and write its tables and summary.

    Args:
        config (ExperimentConfig): validated configuration
        pool (ReplicaPool | None): worker pool, sized by config.threads if None

    Raises:
        ConfigError: if the experiment has no runner

    Returns:
        ResultBundle: tables, checks and metrics of the run
    """
    runner = RUNNERS.get(config.experiment)
    if runner is None:
        raise ConfigError("experiment", f"no runner for {config.experiment}")
    bundle = ResultBundle(config, config.output_path)
    bundle.output_dir.mkdir(parents=True, exist_ok=True)
    LOG.info("running %s with seed %d", config.experiment, config.seed)
    runner(config, bundle, pool or ReplicaPool(config.threads), RngStream(config.seed))
    bundle.write_summary()
    LOG.info(
        "%s finished: %d/%d checks passed",
        config.experiment,
        sum(bundle.checks.values()),
        len(bundle.checks),
    )
    return bundle
