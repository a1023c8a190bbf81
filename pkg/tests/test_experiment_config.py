"""Test experiment configuration."""

import numpy as np
import pytest

from conftest import config_dir
from fdehydro.const import EXPERIMENTS, PROFILE_CONSTANT
from fdehydro.exceptions import ConfigError
from fdehydro.experiment_config import (
    ExperimentConfig,
    ProfileSpec,
    check_parameter_types,
    load_parameters_from_json,
)


class TestProfileSpec:
    def test_sine_function(self):
        spec = ProfileSpec()
        values = spec.function()(np.array([0.0, 0.25, 0.75]))
        assert values == pytest.approx([1.0, 1.5, 0.5])
        assert spec.lower_bound() == 0.5

    def test_constant_function(self):
        spec = ProfileSpec.from_dict({"family": PROFILE_CONSTANT, "value": 2})
        assert spec.function()(np.zeros(3)).tolist() == [2.0, 2.0, 2.0]
        assert spec.to_dict() == {"family": PROFILE_CONSTANT, "value": 2}

    @pytest.mark.parametrize(
        "data",
        [
            {"family": "gauss"},
            {"offset": 0.5, "amplitude": 0.5},
            {"family": PROFILE_CONSTANT, "value": 0.0},
            {"width": 1.0},
            {"offset": "1"},
        ],
    )
    def test_invalid_profiles(self, data):
        with pytest.raises(ConfigError):
            ProfileSpec.from_dict(data)


class TestExperimentConfig:
    # every shipped configuration file is valid
    @pytest.mark.parametrize("experiment", EXPERIMENTS)
    def test_shipped_configs(self, experiment):
        config = ExperimentConfig.from_json(config_dir / f"{experiment}.json")
        assert config.experiment == experiment

    # shipped files carry the acceptance parameters
    @pytest.mark.parametrize(
        "experiment, expected",
        [
            ("hydro-limit", {"n_values": [16, 32, 64], "t_end": 0.01, "replicas": 50}),
            ("entropy-decay", {"n_values": [32, 64, 128, 256], "t_end": 0.01}),
            ("one-block", {"n_values": [64, 128, 256], "delta": 0.3, "t_end": 0.1}),
            ("attractiveness", {"n_values": [32], "pairs": 20}),
            ("max-principle", {"pairs": 20}),
        ],
    )
    def test_acceptance_parameters(self, experiment, expected):
        config = ExperimentConfig.from_json(config_dir / f"{experiment}.json")
        assert {key: getattr(config, key) for key in expected} == expected

    @pytest.mark.parametrize("experiment", ["hydro-limit", "entropy-decay", "one-block"])
    def test_smoke_configs(self, experiment):
        config = ExperimentConfig.from_json(config_dir / "smoke" / f"{experiment}.json")
        assert config.experiment == experiment
        assert config.output_dir.startswith("results/smoke")

    def test_defaults(self, make_config):
        config = make_config("spectral-gap")
        assert config.max_sum == 12
        assert config.threads == 1
        assert config.detailed_debug_logging is False

    def test_overrides_skip_none(self, write_config):
        path = write_config({"experiment": "equivalence", "seed": 5})
        config = ExperimentConfig.from_json(path, {"seed": None, "threads": 3})
        assert config.seed == 5
        assert config.threads == 3

    def test_round_trip(self, make_config):
        config = make_config("hydro-limit", n_values=[16, 32], replicas=4)
        assert ExperimentConfig.from_dict(config.to_dict()) == config

    @pytest.mark.parametrize(
        "data, field",
        [
            ({"experiment": "nope"}, "experiment"),
            ({"seed": 1}, "experiment"),
            ({"experiment": "equivalence", "colour": 1}, "colour"),
            ({"experiment": "equivalence", "replicas": "10"}, "replicas"),
            ({"experiment": "equivalence", "replicas": True}, "replicas"),
            ({"experiment": "equivalence", "alpha": "0.5"}, "alpha"),
            ({"experiment": "equivalence", "n_values": 16}, "n_values"),
            ({"experiment": "equivalence", "n_values": [16, 16.5]}, "n_values"),
            ({"experiment": "equivalence", "n_values": []}, "n_values"),
            ({"experiment": "equivalence", "n_values": [1]}, "n_values"),
            ({"experiment": "equivalence", "checkpoints": 1}, "checkpoints"),
            ({"experiment": "equivalence", "t_end": -1.0}, "t_end"),
            ({"experiment": "equivalence", "seed": -3}, "seed"),
            ({"experiment": "equivalence", "eps": 1.5}, "eps"),
            ({"experiment": "equivalence", "test_functions": ["exp"]}, "test_functions"),
            ({"experiment": "hydro-limit", "alpha": 1.0}, "alpha"),
            ({"experiment": "one-block", "alpha": 0.5, "delta": 0.4}, "delta"),
            (
                {"experiment": "mol-convergence", "n_values": [24], "reference_size": 1024},
                "reference_size",
            ),
        ],
    )
    def test_invalid_configs(self, data, field):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_dict(data)
        assert excinfo.value.field == field

    # ell_n = max(2, ceil(n^delta))
    @pytest.mark.parametrize("n, ell", [(2, 2), (64, 4), (128, 5), (256, 6)])
    def test_block_size(self, make_config, n, ell):
        assert make_config("one-block", delta=0.3).block_size(n) == ell

    def test_checkpoint_times(self, make_config):
        config = make_config("max-principle", t_end=0.01, checkpoints=3)
        assert config.checkpoint_times() == pytest.approx([0.0, 0.005, 0.01])
        assert config.checkpoint_times(1.0) == pytest.approx([0.0, 0.5, 1.0])

    def test_scaling_and_output(self, make_config, tmp_path):
        config = make_config("hydro-limit", n_values=[16, 32])
        assert [p.n for p in config.scaling()] == [16, 32]
        assert config.output_path == tmp_path / "hydro-limit"
        assert config.test_function("cos")(np.array([0.0]))[0] == 1.0


class TestLoadParameters:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_parameters_from_json(tmp_path / "missing.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_parameters_from_json(path)

    def test_top_level_list(self, write_config):
        with pytest.raises(ConfigError):
            load_parameters_from_json(write_config([1, 2]))

    def test_type_checks_accept_ints_for_floats(self):
        check_parameter_types({"alpha": 1, "replicas": 3, "detailed_debug_logging": True})
