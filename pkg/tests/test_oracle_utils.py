import numpy as np
import pytest

from robustdec import (Halfspace, InvalidParameterError, OutcomeSpace, ParhalfHypothesis, Policy, default_selection,
                       frequency_zscores, grid_minimize, grid_projection, hellinger_project, parhalf_to_kernel,
                       trajectory_frequencies, traj_dist)


def test_grid_minimize():
    point, value = grid_minimize(lambda P: (P[:, 0] - 0.3) ** 2, 2, 0.1)
    assert point == pytest.approx([0.3, 0.7])
    assert value == pytest.approx(0.0, abs=1e-12)
    point, _ = grid_minimize(lambda P: P[:, 0], 2, 0.1, mask=lambda P: P[:, 0] >= 0.45)
    assert point == pytest.approx([0.5, 0.5])
    with pytest.raises(InvalidParameterError):
        grid_minimize(lambda P: P[:, 0], 2, 0.5, mask=lambda P: P[:, 0] > 2)


def test_grid_projection_agrees_with_solver():
    belief = Halfspace(OutcomeSpace.of_size(2), [1.0, 0.0], 0.6)
    target = np.array([0.2, 0.8])
    point, d2 = grid_projection(target, belief)
    exact, exact_d2 = hellinger_project(target, belief)
    expected = 1.0 - np.sqrt(0.12) - np.sqrt(0.32)
    assert point == pytest.approx([0.6, 0.4], abs=1e-9)
    assert d2 == pytest.approx(expected, abs=1e-9)
    assert exact_d2 == pytest.approx(expected, abs=1e-6)
    assert exact.probs == pytest.approx([0.6, 0.4], abs=1e-4)


def test_zscores():
    assert frequency_zscores({'a': 0.5, 'b': 0.5}, {'a': 0.5, 'b': 0.5}, 100) == {'a': 0.0, 'b': 0.0}
    scores = frequency_zscores({'a': 1.0}, {'a': 0.9, 'c': 0.1}, 100)
    assert scores['a'] == np.inf
    assert scores['c'] == np.inf
    assert frequency_zscores({'a': 0.5}, {'a': 0.6}, 100)['a'] == pytest.approx(2.0)


def test_rollout_frequencies_match(rng):
    hyp = ParhalfHypothesis(2, 2, 2, np.zeros((3, 2), dtype=int), np.full((3, 2, 2), 0.5), np.full((3, 2), 0.3))
    selection = default_selection(parhalf_to_kernel(hyp))
    pi = Policy(np.full((2, 2, 2), 0.5))
    n = 4000
    freq = trajectory_frequencies(selection, pi, rng, n)
    exact = traj_dist(selection, pi)
    assert sum(freq.values()) == pytest.approx(1.0)
    assert set(freq) <= set(exact)
    assert max(frequency_zscores(exact, freq, n).values()) < 6.0
    with pytest.raises(InvalidParameterError):
        trajectory_frequencies(selection, pi, rng, 0)
