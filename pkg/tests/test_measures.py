"""Exact information functionals and the input-measure type."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icand.errors import (
    AbsoluteContinuityError,
    AssumptionViolationError,
    ConditioningError,
    InvalidDistributionError,
    MalformedInputError,
)
from icand.measures import (
    InputDistribution,
    InputLabel,
    binary_entropy,
    canonical_labels,
    divergence,
    entropy,
    mutual_information,
)


def direct_entropy_bits(p):
    """Independent oracle: -sum p log2 p."""
    return -sum(x * math.log2(x) for x in p if x > 0)


class TestEntropy:
    def test_uniform_binary(self):
        assert entropy((0.5, 0.5)) == pytest.approx(1.0, abs=1e-15)

    def test_point_mass(self):
        assert entropy((1.0, 0.0)) == 0.0

    def test_uniform_ternary(self):
        expected = direct_entropy_bits([1 / 3] * 3)  # = 1.584962500721156
        assert entropy((1 / 3, 1 / 3, 1 / 3)) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(1.584962500721156, abs=1e-12)

    def test_rejects_negative_mass(self):
        with pytest.raises(InvalidDistributionError):
            entropy((1.2, -0.2))

    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidDistributionError):
            entropy((0.5, 0.4))

    def test_binary_entropy_symmetric(self):
        assert binary_entropy(0.2) == pytest.approx(binary_entropy(0.8), abs=1e-15)
        assert binary_entropy(0.0) == 0.0


class TestDivergence:
    def test_identical_is_zero(self):
        assert divergence((0.3, 0.7), (0.3, 0.7)) == 0.0

    def test_point_vs_uniform(self):
        assert divergence((1.0, 0.0), (0.5, 0.5)) == pytest.approx(1.0, abs=1e-15)

    def test_tilted_vs_uniform(self):
        # direct evaluation: 0.75 log2(1.5) + 0.25 log2(0.5)
        expected = 0.75 * math.log2(1.5) + 0.25 * math.log2(0.5)
        assert divergence((0.75, 0.25), (0.5, 0.5)) == pytest.approx(expected, abs=1e-14)
        assert expected == pytest.approx(0.18872187554086717, abs=1e-15)

    def test_support_violation(self):
        with pytest.raises(AbsoluteContinuityError):
            divergence((0.5, 0.5), (1.0, 0.0))


class TestMutualInformation:
    def test_product_joint(self):
        joint = np.outer((0.3, 0.7), (0.6, 0.4))
        assert mutual_information(joint) == pytest.approx(0.0, abs=1e-12)

    def test_identity_coupling(self):
        assert mutual_information(np.diag((0.5, 0.5))) == pytest.approx(1.0, abs=1e-14)

    def test_missing_corner(self):
        # direct evaluation of the H-terms: 2 H(1/3) - log2 3
        joint = np.array([[1 / 3, 1 / 3], [1 / 3, 0.0]])
        expected = (
            2 * direct_entropy_bits([2 / 3, 1 / 3]) - direct_entropy_bits([1 / 3] * 3)
        )
        assert expected == pytest.approx(0.2516291673878229, abs=1e-12)
        assert mutual_information(joint) == pytest.approx(expected, abs=1e-13)


@st.composite
def small_joints(draw):
    rows = draw(st.integers(2, 4))
    cols = draw(st.integers(2, 4))
    raw = draw(
        st.lists(
            st.floats(0.01, 1.0), min_size=rows * cols, max_size=rows * cols
        )
    )
    j = np.array(raw).reshape(rows, cols)
    return j / j.sum()


class TestInvariants:
    @given(small_joints())
    @settings(max_examples=60, deadline=None)
    def test_entropy_chain_rule(self, joint):
        h_joint = entropy(joint.ravel())
        marg = joint.sum(axis=1)
        h_cond = sum(
            m * entropy(row / m) for m, row in zip(marg, joint) if m > 0
        )
        assert h_joint == pytest.approx(entropy(marg) + h_cond, abs=1e-10)

    @given(small_joints())
    @settings(max_examples=60, deadline=None)
    def test_divergence_nonnegative(self, joint):
        p = joint.ravel()
        q = np.full_like(p, 1.0 / p.size)
        assert divergence(p, q) >= 0.0
        assert divergence(p, p) == 0.0

    @given(
        st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
        st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
        st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4),
    )
    @settings(max_examples=60, deadline=None)
    def test_statistical_distance_triangle(self, a, b, c):
        labels = canonical_labels(2)
        dists = [
            InputDistribution(2, dict(zip(labels, np.array(v) / np.sum(v))))
            for v in (a, b, c)
        ]
        d_ab = dists[0].statistical_distance(dists[1])
        d_bc = dists[1].statistical_distance(dists[2])
        d_ac = dists[0].statistical_distance(dists[2])
        assert d_ac <= d_ab + d_bc + 1e-12


class TestStatisticalDistance:
    def test_equal(self):
        mu = InputDistribution.two_party(0.25, 0.25, 0.25, 0.25)
        assert mu.statistical_distance(mu) == 0.0

    def test_disjoint_points(self):
        a = InputDistribution.point_mass(InputLabel.from_string("00"))
        b = InputDistribution.point_mass(InputLabel.from_string("11"))
        assert a.statistical_distance(b) == 1.0

    def test_example(self):
        a = InputDistribution.two_party(1 / 3, 1 / 3, 1 / 3, 0.0)
        b = InputDistribution.two_party(0.3, 0.3, 0.3, 0.1)
        assert a.statistical_distance(b) == pytest.approx(0.1, abs=1e-12)

    def test_mismatched_k(self):
        a = InputDistribution.two_party(0.5, 0.5, 0, 0)
        b = InputDistribution.uniform_basis(3)
        with pytest.raises(InvalidDistributionError):
            a.statistical_distance(b)


class TestInputDistribution:
    def test_support_family_enforced(self):
        with pytest.raises(AssumptionViolationError):
            InputDistribution(3, {"110": 0.5, "000": 0.5})

    def test_two_party_full_cube_allowed(self):
        mu = InputDistribution.two_party(0.1, 0.2, 0.3, 0.4)
        assert mu.mass("11") == pytest.approx(0.4)

    def test_sum_validation(self):
        with pytest.raises(InvalidDistributionError):
            InputDistribution(2, {"00": 0.5, "01": 0.6})

    def test_beta_zeta(self):
        mu = InputDistribution(3, {"000": 0.4, "100": 0.2, "010": 0.1, "001": 0.3})
        assert mu.beta(1) == pytest.approx(0.2)
        assert mu.zeta(1) == pytest.approx(0.8)
        assert mu.e_mass(3) == pytest.approx(0.3)

    def test_condition_on_player(self):
        mu = InputDistribution.two_party(0.25, 0.25, 0.25, 0.25)
        cond = mu.condition_on_player(1, 0)
        assert cond.mass("00") == pytest.approx(0.5)
        assert cond.mass("10") == 0.0
        with pytest.raises(ConditioningError):
            InputDistribution.two_party(0.5, 0.5, 0, 0).condition_on_player(1, 1)

    def test_without_all_ones(self):
        mu = InputDistribution.two_party(0.2, 0.3, 0.1, 0.4)
        reduced, c = mu.without_all_ones()
        assert c == pytest.approx(0.4)
        assert reduced.mass_ones == 0.0
        assert reduced.mass("00") == pytest.approx(0.2 / 0.6)

    def test_json_round_trip(self):
        mu = InputDistribution(3, {"000": 0.4, "100": 0.2, "010": 0.2, "001": 0.2})
        again = InputDistribution.from_json(mu.to_json())
        assert again == mu

    def test_json_rejects_garbage(self):
        with pytest.raises(MalformedInputError):
            InputDistribution.from_json("{not json")
        with pytest.raises(MalformedInputError):
            InputDistribution.from_json('{"k": 2}')

    def test_entropy_given_player(self):
        mu = InputDistribution.two_party(0.25, 0.25, 0.25, 0.25)
        # independent fair bits: H(X | X_i) = 1
        assert mu.entropy_given_player(1) == pytest.approx(1.0, abs=1e-12)

    def test_label_parsing(self):
        assert str(InputLabel.from_string("010")) == "010"
        assert InputLabel.basis(3, 1).bits == (1, 0, 0)
        with pytest.raises(MalformedInputError):
            InputLabel.from_string("01x")
