"""Command line entry point: fdehydro <experiment> --config path."""

import argparse
import logging
import sys
from collections.abc import Sequence

from .const import EXPERIMENTS, LOG_FORMAT, LOGGER_NAME, __version__
from .exceptions import ConfigError, FdeHydroError
from .experiment_config import ExperimentConfig, load_parameters_from_json
from .experiments import run_experiment
from .plots import emit_plots
from .replica_pool import ReplicaPool

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


class _ConsoleHandler(logging.StreamHandler):
    """stdout handler owned by the fdehydro package logger."""


def setup_logger(level: int) -> logging.Logger:
    """Attach one stdout handler to the fdehydro package logger at level."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    handler = next((h for h in logger.handlers if isinstance(h, _ConsoleHandler)), None)
    if handler is None:
        handler = _ConsoleHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    handler.setLevel(level)
    return logger


def handle_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Handle program arguments using argparse.

    Returns:
        argparse.Namespace: Parsed command-line arguments.
    """
    parser = argparse.ArgumentParser(
        prog="fdehydro",
        description="Fast diffusion hydrodynamic limit experiments",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS, help="experiment to run")
    parser.add_argument(
        "--config", required=True, help="JSON file containing experiment parameters"
    )
    parser.add_argument(
        "--seed", type=int, default=None, help="root seed (overrides the JSON file)"
    )
    parser.add_argument(
        "--out", default=None, help="output directory (overrides the JSON file)"
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker processes for replicas (overrides the JSON file)",
    )
    parser.add_argument(
        "--debug", action="store_true", help="enable debug logging"
    )
    parser.add_argument("--version", action="version", version=__version__)
    return parser.parse_args(argv)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the JSON file with the command line flags.

    Raises:
        ConfigError: if the file is invalid or names another experiment
    """
    parameters = load_parameters_from_json(args.config)
    named = parameters.get("experiment", args.experiment)
    if named != args.experiment:
        raise ConfigError(
            "experiment", f"{args.config} configures {named}, not {args.experiment}"
        )
    parameters["experiment"] = args.experiment
    overrides = {"seed": args.seed, "output_dir": args.out, "threads": args.threads}
    for key, value in overrides.items():
        if value is not None:
            parameters[key] = value
    return ExperimentConfig.from_dict(parameters)


def main(argv: Sequence[str] | None = None) -> int:
    """Run main program.

    Returns:
        int: 0 if every check passed, 1 on failed checks or run errors,
            2 on configuration errors
    """
    args = handle_args(argv)
    setup_logger(logging.DEBUG if args.debug else logging.INFO)
    try:
        config = load_config(args)
    except ConfigError as ex:
        LOG.error("%s", ex)
        return EXIT_CONFIG
    if config.detailed_debug_logging:
        setup_logger(logging.DEBUG)
    try:
        bundle = run_experiment(config, ReplicaPool(config.threads))
        emit_plots(bundle)
    except ConfigError as ex:
        LOG.error("%s", ex)
        return EXIT_CONFIG
    except FdeHydroError as ex:
        LOG.error("%s failed: %s", config.experiment, ex)
        return EXIT_FAILED
    failed = [name for name, ok in bundle.checks.items() if not ok]
    if failed:
        LOG.error("%s: failed checks %s", config.experiment, ", ".join(failed))
        return EXIT_FAILED
    if not bundle.passed:
        LOG.error("%s recorded no checks", config.experiment)
        return EXIT_FAILED
    LOG.info("%s passed, results in %s", config.experiment, bundle.output_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
