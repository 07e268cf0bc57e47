import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustdec import (DimensionError, Dist, InvalidParameterError, OutcomeSpace, SubDist, bhattacharyya,
                       hellinger_sq, hellinger_sq_grad)


@st.composite
def dist_pairs(draw, max_size=5):
    n = draw(st.integers(2, max_size))
    weights = st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)
    p, q = np.asarray(draw(weights)), np.asarray(draw(weights))
    return p / p.sum(), q / q.sum()


class TestOutcomeSpace:
    def test_labels_must_be_unique(self):
        with pytest.raises(InvalidParameterError):
            OutcomeSpace(('a', 'a'))

    def test_empty_space_rejected(self):
        with pytest.raises(InvalidParameterError):
            OutcomeSpace(())

    def test_reward_state_order(self):
        space = OutcomeSpace.reward_state(2)
        assert space.labels == ((0, 0), (0, 1), (1, 0), (1, 1))
        assert space.index((1, 0)) == 2


class TestDist:
    def test_normalization_checked(self, coin):
        with pytest.raises(InvalidParameterError):
            Dist(coin, [0.5, 0.6])

    def test_shape_checked(self, coin):
        with pytest.raises(DimensionError):
            Dist(coin, [1.0])

    def test_from_weights(self, coin):
        d = Dist.from_weights(coin, [1.0, 3.0])
        assert d['hi'] == pytest.approx(0.75)
        assert d.expect([0.0, 1.0]) == pytest.approx(0.75)

    def test_probs_are_read_only(self, coin):
        d = Dist.uniform(coin)
        with pytest.raises(ValueError):
            d.probs[0] = 1.0

    def test_equality_and_hash(self, coin):
        assert Dist.point(coin, 1) == Dist(coin, [0.0, 1.0])
        assert len({Dist.point(coin, 1), Dist(coin, [0.0, 1.0])}) == 1


def test_subdist_mass_bound(coin):
    assert SubDist(coin, [0.2, 0.3]).total == pytest.approx(0.5)
    with pytest.raises(InvalidParameterError):
        SubDist(coin, [0.7, 0.4])


class TestHellinger:
    def test_identical_points(self, coin):
        assert hellinger_sq(Dist.point(coin, 0), Dist.point(coin, 0)) == 0.0

    def test_disjoint_support(self):
        assert hellinger_sq([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_half_against_point(self):
        assert hellinger_sq([0.5, 0.5], [0.0, 1.0]) == pytest.approx(1.0 - np.sqrt(0.5), abs=1e-12)
        assert hellinger_sq([0.5, 0.5], [0.0, 1.0]) == pytest.approx(0.29289, abs=1e-5)

    def test_mismatched_spaces(self, coin):
        other = OutcomeSpace(('x', 'y'))
        with pytest.raises(DimensionError):
            hellinger_sq(Dist.uniform(coin), Dist.uniform(other))

    @given(dist_pairs())
    def test_symmetric_and_bounded(self, pair):
        p, q = pair
        d = hellinger_sq(p, q)
        assert 0.0 <= d <= 1.0
        assert d == pytest.approx(hellinger_sq(q, p), abs=1e-12)
        assert bhattacharyya(p, q) == pytest.approx(1.0 - d, abs=1e-12)

    @settings(max_examples=50)
    @given(dist_pairs())
    def test_gradient_matches_finite_differences(self, pair):
        mu, nu = pair
        grad = hellinger_sq_grad(mu, nu)
        h = 1e-6
        for o in range(len(nu)):
            e = np.zeros(len(nu))
            e[o] = h
            # directional derivative of the unnormalized expression
            fd = ((1.0 - np.sqrt(mu * (nu + e)).sum()) - (1.0 - np.sqrt(mu * (nu - e)).sum())) / (2 * h)
            assert grad[o] == pytest.approx(fd, abs=1e-4)
