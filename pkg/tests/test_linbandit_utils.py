import numpy as np
import pytest

from robustdec import (BilinearSpec, DimensionError, HypothesisBox, InfeasiblePointError, InvalidParameterError,
                       cover_count_bound, cover_models, grid_cover, model_from_point, point_label)


@pytest.fixture
def mean_spec(coin):
    """One action whose 'hi' probability equals (z + 1) / 2."""
    return BilinearSpec(coin, [[[[-0.5, -0.5]]]], [[[-0.5, 0.5]]])


@pytest.fixture
def pinned_spec(coin):
    """F = z: only z = 0 leaves a feasible model."""
    return BilinearSpec(coin, [[[[1.0, 1.0]]]])


class TestBox:
    def test_bounds(self):
        with pytest.raises(InvalidParameterError):
            HypothesisBox((0.5,), (0.2,))
        with pytest.raises(InvalidParameterError):
            HypothesisBox((-2.0,), (1.0,))
        with pytest.raises(DimensionError):
            HypothesisBox((0.0, 0.0), (1.0,))
        assert HypothesisBox.cube(3).dim == 3

    def test_samples_inside(self, rng):
        box = HypothesisBox((-0.5, 0.0), (0.5, 1.0))
        z = box.sample(100, rng)
        assert z.shape == (100, 2)
        assert np.all(z >= [-0.5, 0.0]) and np.all(z <= [0.5, 1.0])


class TestCover:
    def test_unit_square(self):
        box = HypothesisBox((0.0, 0.0), (1.0, 1.0))
        points = grid_cover(box, 0.5)
        assert len(points) <= 5
        assert len(points) <= cover_count_bound(box, 0.5)

    def test_interval(self):
        points = grid_cover(HypothesisBox((-1.0,), (1.0,)), 0.2)
        assert points[:, 0] == pytest.approx([-0.8, -0.4, 0.0, 0.4, 0.8])

    @pytest.mark.parametrize('eps', [0.05, 0.3, 0.7])
    def test_every_point_is_covered(self, rng, eps):
        box = HypothesisBox((-1.0, -0.5), (1.0, 0.5))
        points = grid_cover(box, eps)
        z = box.sample(500, rng)
        nearest = np.min(np.linalg.norm(z[:, None, :] - points[None, :, :], axis=2), axis=1)
        assert np.all(nearest <= eps + 1e-12)
        assert len(points) <= cover_count_bound(box, eps)

    def test_radius_positive(self):
        with pytest.raises(InvalidParameterError):
            grid_cover(HypothesisBox.cube(1), 0.0)


class TestModels:
    def test_bilinear_shapes(self, coin):
        with pytest.raises(DimensionError):
            BilinearSpec(coin, np.zeros((1, 1, 1, 3)))
        with pytest.raises(DimensionError):
            BilinearSpec(coin, np.zeros((1, 1, 1, 2)), np.zeros((2, 1, 2)))

    def test_point_model(self, mean_spec):
        M = model_from_point(mean_spec, [0.2])
        assert M.label == point_label([0.2]) == 'z=(0.2)'
        assert M[0].contains([0.4, 0.6])
        assert not M[0].contains([0.5, 0.5])
        assert mean_spec.evaluate(0, [0.2], [0.4, 0.6]) == pytest.approx([0.0])

    def test_infeasible_point(self, pinned_spec):
        with pytest.raises(InfeasiblePointError) as info:
            model_from_point(pinned_spec, [0.5])
        assert info.value.action == 0
        model_from_point(pinned_spec, [0.0])

    def test_cover_skips_infeasible_points(self, pinned_spec):
        H, points = cover_models(pinned_spec, HypothesisBox.cube(1), 0.2)
        assert len(H) == 1
        assert points[:, 0] == pytest.approx([0.0], abs=1e-12)

    def test_cover_without_feasible_points(self, pinned_spec):
        with pytest.raises(InfeasiblePointError):
            cover_models(pinned_spec, HypothesisBox((0.5,), (1.0,)), 0.2)
