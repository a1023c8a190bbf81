"""Test lattice primitives."""

import numpy as np
import pytest

from fdehydro.exceptions import (
    DomainError,
    EmptySiteError,
    NotNeighborError,
    SizeMismatchError,
)
from fdehydro.lattice import (
    Configuration,
    DensityProfile,
    RngStream,
    ScalingParams,
    TorusIndex,
    jump_configuration,
    partial_order_leq,
)


class TestScalingParams:
    # derived quantities agree with n and alpha
    def test_derived_values(self):
        params = ScalingParams(16, 0.5)
        assert params.n_alpha == pytest.approx(4.0)
        assert params.inverse_n_alpha == pytest.approx(0.25)
        assert params.speedup == pytest.approx(16.0**2 * 16.0)
        assert params.jump_rate == pytest.approx(2.0 * 16.0**3)

    # alpha = 0 gives the unscaled lattice
    def test_alpha_zero(self):
        params = ScalingParams(8, 0.0)
        assert params.n_alpha == 1.0
        assert params.jump_rate == pytest.approx(128.0)

    # with_size keeps alpha
    def test_with_size(self):
        assert ScalingParams(16, 0.25).with_size(32) == ScalingParams(32, 0.25)

    @pytest.mark.parametrize("n, alpha", [(1, 0.5), (16, -0.1), (16, float("nan"))])
    def test_invalid_values(self, n, alpha):
        with pytest.raises(DomainError):
            ScalingParams(n, alpha)


class TestTorusIndex:
    # addition and subtraction wrap around
    def test_wrap_around(self):
        x = TorusIndex(0, 5)
        assert (x - 1).x == 4
        assert (TorusIndex(4, 5) + 1).x == 0
        assert TorusIndex.wrap(-6, 5).x == 4

    def test_neighbors(self):
        left, right = TorusIndex(0, 5).neighbors()
        assert (left.x, right.x) == (4, 1)
        assert TorusIndex(0, 5).is_neighbor(TorusIndex(4, 5))
        assert not TorusIndex(0, 5).is_neighbor(TorusIndex(2, 5))
        assert not TorusIndex(0, 5).is_neighbor(TorusIndex(1, 6))

    def test_embed(self):
        assert TorusIndex(3, 4).embed() == 0.75

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            TorusIndex(5, 5)


class TestConfiguration:
    # counts are copied and read-only
    def test_counts_frozen(self):
        source = np.array([1, 0, 2])
        config = Configuration(source)
        source[0] = 7
        assert config[0] == 1
        with pytest.raises(ValueError):
            config.counts[0] = 3

    def test_total_and_occupied(self):
        config = Configuration([3, 0, 1, 0])
        assert config.total == 4
        assert config.n == 4
        assert config.occupied.tolist() == [0, 2]
        assert config[TorusIndex(2, 4)] == 1
        assert config[-1] == 0

    def test_negative_counts_rejected(self):
        with pytest.raises(DomainError):
            Configuration([1, -1])

    def test_record_round_trip(self):
        params = ScalingParams(3, 0.5)
        config = Configuration([1, 2, 3])
        rebuilt, rebuilt_params = Configuration.from_record(config.to_record(params))
        assert rebuilt == config
        assert rebuilt_params == params

    def test_record_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            Configuration([1, 2]).to_record(ScalingParams(3, 0.5))

    def test_to_frame(self):
        frame = Configuration([2, 0]).to_frame()
        assert frame["count"].tolist() == [2, 0]


class TestJumpConfiguration:
    # a jump moves exactly one particle and conserves the total
    def test_jump_moves_one_particle(self):
        eta = Configuration([2, 0, 0, 1])
        moved = jump_configuration(eta, 0, 3)
        assert moved.counts.tolist() == [1, 0, 0, 2]
        assert moved.total == eta.total
        assert eta.counts.tolist() == [2, 0, 0, 1]

    def test_jump_with_torus_index(self):
        eta = Configuration([0, 0, 1])
        moved = jump_configuration(eta, TorusIndex(2, 3), TorusIndex(0, 3))
        assert moved.counts.tolist() == [1, 0, 0]

    def test_empty_site(self):
        with pytest.raises(EmptySiteError):
            jump_configuration(Configuration([0, 1, 0]), 0, 1)

    def test_not_neighbor(self):
        with pytest.raises(NotNeighborError):
            jump_configuration(Configuration([1, 0, 0, 0]), 0, 2)
        with pytest.raises(NotNeighborError):
            jump_configuration(Configuration([1, 0, 0, 0]), 0, 0)


def test_partial_order():
    """Check the coordinatewise order."""
    assert partial_order_leq(Configuration([0, 1]), Configuration([1, 1]))
    assert not partial_order_leq(Configuration([2, 1]), Configuration([1, 1]))
    with pytest.raises(SizeMismatchError):
        partial_order_leq(Configuration([0]), Configuration([0, 0]))


def test_partial_order_axioms():
    """Reflexive, antisymmetric and transitive on random triples."""
    rng = np.random.default_rng(17)
    comparable = 0
    for _ in range(500):
        a, b, c = (Configuration(rng.integers(0, 3, size=3)) for _ in range(3))
        assert partial_order_leq(a, a)
        if partial_order_leq(a, b) and partial_order_leq(b, a):
            assert a == b
        if partial_order_leq(a, b) and partial_order_leq(b, c):
            comparable += 1
            assert partial_order_leq(a, c)
    assert comparable > 0


class TestDensityProfile:
    # from_function samples at x/n
    def test_from_function(self):
        profile = DensityProfile.from_function(lambda x: 1.0 + x, 4)
        assert profile.values.tolist() == [1.0, 1.25, 1.5, 1.75]
        assert profile.is_positive()

    def test_constant_and_zero(self):
        assert DensityProfile.constant(2.0, 3).values.tolist() == [2.0, 2.0, 2.0]
        assert not DensityProfile([0.0, 1.0]).is_positive()

    @pytest.mark.parametrize("values", [[-0.1, 1.0], [float("inf")], []])
    def test_invalid_profiles(self, values):
        with pytest.raises(DomainError):
            DensityProfile(values)


class TestRngStream:
    # children depend only on the root seed and their index
    def test_spawn_reproducible(self):
        first = [s.generator.random() for s in RngStream(42).spawn(3)]
        second = [s.generator.random() for s in RngStream(42).spawn(3)]
        assert first == second
        assert len(set(first)) == 3

    def test_spawn_key_and_seed(self):
        children = RngStream(7).spawn(2)
        assert children[1].spawn_key == (1,)
        assert children[1].seed == 7

    def test_invalid_seed(self):
        with pytest.raises(DomainError):
            RngStream(-1)
        with pytest.raises(DomainError):
            RngStream(7).spawn(-1)
