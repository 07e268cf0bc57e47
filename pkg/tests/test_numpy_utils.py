import numpy as np
import pytest

from robustdec import describe, lowest_argmax, lowest_argmin, make_rng, normalize, random_simplex, simplex_grid


def test_named_streams():
    a = make_rng(7, 'policy').random(5)
    assert np.array_equal(a, make_rng(7, 'policy').random(5))
    assert not np.array_equal(a, make_rng(7, 'env').random(5))
    assert not np.array_equal(a, make_rng(8, 'policy').random(5))


def test_simplex_grid():
    grid = simplex_grid(3, 0.5)
    assert len(grid) == 6
    assert np.allclose(grid.sum(axis=1), 1.0)
    assert simplex_grid(1, 0.1).tolist() == [[1.0]]
    assert len(simplex_grid(2, 1e-3)) == 1001


def test_ties_prefer_lowest_index():
    assert lowest_argmax([0.2, 0.5, 0.5]) == 1
    assert lowest_argmin([0.3, 0.1, 0.1 + 1e-15]) == 1


def test_normalize():
    assert normalize([2.0, -1e-18, 2.0]).tolist() == [0.5, 0.0, 0.5]
    with pytest.raises(ValueError):
        normalize([0.0, 0.0])


def test_random_points(rng):
    points = random_simplex(4, rng, size=10)
    assert points.shape == (10, 4)
    assert np.allclose(points.sum(axis=1), 1.0)
    assert describe(np.zeros((2, 3))) == '(2, 3), [0, 0], float64'
