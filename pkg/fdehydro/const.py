"""Constants for fdehydro."""

import math

__version__ = "0.3.2"

# sentinel for +infinity (unbounded time windows, divergent MGFs)
INFINITY = math.inf

# lattice
MIN_LATTICE_SIZE = 2

# integrator defaults
DEFAULT_INTEGRATOR_METHOD = "RK45"
DEFAULT_ATOL = 1e-10
DEFAULT_RTOL = 1e-8
DEFAULT_MAX_EVALUATIONS = 20_000_000
NONLINEARITY_DISCRETE = "discrete"
NONLINEARITY_FAST = "fast"
NONLINEARITIES = (NONLINEARITY_DISCRETE, NONLINEARITY_FAST)

# canonical ensembles
ENUMERATION_CAP = 200_000
GENERATOR_CAP = 4_000
RATIONAL_CAP = 10_000
EIGENVALUE_ZERO_TOL = 1e-9

# tolerances used by experiment checks
MASS_DRIFT_TOL = 1e-10
MAX_PRINCIPLE_TOL = 1e-12
COMPARISON_TOL = 1e-9
ENERGY_TOL = 1e-9
POINCARE_REL_TOL = 1e-12
GAP_EXACT_TOL = 1e-12

# profile families
PROFILE_SINE = "sine"
PROFILE_CONSTANT = "constant"
PROFILE_FAMILIES = (PROFILE_SINE, PROFILE_CONSTANT)

# test functions for empirical pairings
TEST_FUNCTION_ONE = "one"
TEST_FUNCTION_COS = "cos"
TEST_FUNCTION_SIN = "sin"
TEST_FUNCTIONS = (TEST_FUNCTION_ONE, TEST_FUNCTION_COS, TEST_FUNCTION_SIN)

# experiments
EXPERIMENT_MOL_CONVERGENCE = "mol-convergence"
EXPERIMENT_MAX_PRINCIPLE = "max-principle"
EXPERIMENT_EQUIVALENCE = "equivalence"
EXPERIMENT_SPECTRAL_GAP = "spectral-gap"
EXPERIMENT_CONCENTRATION = "concentration"
EXPERIMENT_RATE_LEMMAS = "rate-lemmas"
EXPERIMENT_HYDRO_LIMIT = "hydro-limit"
EXPERIMENT_ONE_BLOCK = "one-block"
EXPERIMENT_ATTRACTIVENESS = "attractiveness"
EXPERIMENT_ENTROPY_DECAY = "entropy-decay"
EXPERIMENTS = (
    EXPERIMENT_MOL_CONVERGENCE,
    EXPERIMENT_MAX_PRINCIPLE,
    EXPERIMENT_EQUIVALENCE,
    EXPERIMENT_SPECTRAL_GAP,
    EXPERIMENT_CONCENTRATION,
    EXPERIMENT_RATE_LEMMAS,
    EXPERIMENT_HYDRO_LIMIT,
    EXPERIMENT_ONE_BLOCK,
    EXPERIMENT_ATTRACTIVENESS,
    EXPERIMENT_ENTROPY_DECAY,
)
# experiments whose hypotheses need 0 < alpha < 1
HYDRODYNAMIC_EXPERIMENTS = (
    EXPERIMENT_MOL_CONVERGENCE,
    EXPERIMENT_HYDRO_LIMIT,
    EXPERIMENT_ONE_BLOCK,
    EXPERIMENT_ENTROPY_DECAY,
)
# experiments comparing against the fine-grid reference solver
REFERENCE_EXPERIMENTS = (
    EXPERIMENT_MOL_CONVERGENCE,
    EXPERIMENT_HYDRO_LIMIT,
    EXPERIMENT_ENTROPY_DECAY,
)

# experiment configuration defaults
DEFAULT_N_VALUES = (16, 32, 64, 128)
DEFAULT_ALPHA = 0.5
DEFAULT_DELTA = 0.3
DEFAULT_EPS = 0.5
DEFAULT_EPS0 = 0.5
DEFAULT_CUTOFF = 4.0
DEFAULT_REPLICAS = 50
DEFAULT_SEED = 20240917
DEFAULT_T_END = 0.01
DEFAULT_CHECKPOINTS = 11
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_THREADS = 1
DEFAULT_REFERENCE_SIZE = 1024
DEFAULT_TIME_CAP = 0.02
DEFAULT_MIN_REDUCTION = 4.0
DEFAULT_RHO = 1.0
DEFAULT_ELL = 50
DEFAULT_NALPHA = 4.0
DEFAULT_UPPER_LEVELS = (1.5, 2.0)
DEFAULT_LOWER_LEVELS = (0.5, 0.6)
DEFAULT_MAX_SUM = 12
DEFAULT_MAX_ELL = 6
DEFAULT_MAX_K = 10
DEFAULT_PAIRS = 20
DEFAULT_EVENTS = 100_000
DEFAULT_SAMPLES = 1000
DEFAULT_PROFILE_OFFSET = 1.0
DEFAULT_PROFILE_AMPLITUDE = 0.5

SUMMARY_FILE = "summary.json"

LOGGER_NAME = "fdehydro"
LOG_FORMAT = "%(asctime)s fdehydro %(levelname)s [%(name)s] %(message)s"
