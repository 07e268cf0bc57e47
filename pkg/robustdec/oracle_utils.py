"""
Brute-force reference computations: grid searches over simplices and
Monte-Carlo trajectory frequencies. Slow by construction; used to cross-check
the exact solvers on small instances.
"""

import logging
from collections import Counter

import numpy as np

from .error_utils import DimensionError, InvalidParameterError
from .numpy_utils import lowest_argmax, simplex_grid
from .prob_utils import OutcomeSpace, SubDist
from .rmdp_utils import rollout

__all__ = ['grid_minimize', 'grid_offset_dec', 'grid_fuzzy_dec', 'grid_projection', 'trajectory_frequencies',
           'frequency_zscores']

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-12


def grid_minimize(fun, n, step, mask=None):
    """
    Minimize a vectorized function over the simplex grid.

    Inputs:
        fun - Callable mapping an array (n_points, n) to values (n_points,).
        n - Dimension.
        step - Grid spacing.
        mask - Optional callable returning a boolean array of admissible points.
            (Default: None)
    Outputs:
        point - Minimizing grid point (lowest grid index among ties).
        value - Its value.
    """

    grid = simplex_grid(n, step)
    if mask is not None:
        grid = grid[np.asarray(mask(grid), dtype=bool)]
        if len(grid) == 0:
            raise InvalidParameterError('no admissible grid point at step {}'.format(step))
    values = np.asarray(fun(grid), dtype=float)
    i = int(np.argmin(values))
    return grid[i], float(values[i])


def _tables(maxf, fbar, L):
    maxf = np.asarray(maxf, dtype=float)
    fbar = np.asarray(fbar, dtype=float)
    L = np.asarray(L, dtype=float)
    if L.shape != (len(maxf), len(fbar)):
        raise DimensionError('loss table has shape {}, expected {}'.format(L.shape, (len(maxf), len(fbar))))
    return maxf, fbar, L


def grid_offset_dec(maxf, fbar, L, gamma, step=1e-3):
    """
    Offset DEC by enumerating action distributions on a grid.

    Outputs:
        value - min over grid p of max over M of maxf[M] - p . (fbar + gamma L[M]).
        p - The minimizing grid point.
    """

    maxf, fbar, L = _tables(maxf, fbar, L)

    def objective(P):
        gains = P @ fbar[:, None] + gamma * P @ L.T
        return np.max(maxf[None, :] - gains, axis=1)

    p, value = grid_minimize(objective, len(fbar), step)
    return value, p


def grid_fuzzy_dec(maxf, fbar, L, eps, step=0.02, return_adversary=False):
    """
    Fuzzy DEC straight from its saddle-point form.

    For each grid action distribution p, the adversary picks a sub-distribution mu
    over hypotheses (grid of the same step) with expected loss at most eps^2 and
    collects the expected regret sum_M mu(M) (maxf[M] - p . fbar).

    Outputs:
        value - min over p of the adversary's best value.
        p - The minimizing grid point.
        adversary - If return_adversary, the adversary's best SubDist over hypotheses at p,
            on the space M0, M1, ...
    """

    maxf, fbar, L = _tables(maxf, fbar, L)
    if eps < 0:
        raise InvalidParameterError('eps must be non-negative, got {}'.format(eps))
    n_models = len(maxf)
    mus = simplex_grid(n_models + 1, step)[:, :n_models]
    budget = float(eps) ** 2 + FEAS_TOL

    def objective(P):
        regret = maxf[None, :] - (P @ fbar)[:, None]
        losses = P @ L.T
        gains = regret @ mus.T
        feasible = losses @ mus.T <= budget
        return np.max(np.where(feasible, gains, -np.inf), axis=1)

    p, value = grid_minimize(objective, len(fbar), step)
    if not return_adversary:
        return value, p
    gains = mus @ (maxf - p @ fbar)
    feasible = mus @ (L @ p) <= budget
    best = lowest_argmax(np.where(feasible, gains, -np.inf))
    return value, p, SubDist(OutcomeSpace.of_size(n_models, prefix='M'), mus[best])


def grid_projection(target, belief, step=1e-3):
    """
    Hellinger projection of target onto belief by grid search over its members.

    Outputs:
        point - Closest member on the grid.
        dist_sq - Its squared Hellinger distance to target.
    """

    target = np.asarray(target, dtype=float)
    if target.shape != (belief.size,):
        raise DimensionError('target has shape {}, belief has {} outcomes'.format(target.shape, belief.size))

    def members(P):
        return [belief.contains(x) for x in P]

    def dist_sq(P):
        return 1.0 - np.sqrt(P * target[None, :]).sum(axis=1)

    return grid_minimize(dist_sq, belief.size, step, mask=members)


def trajectory_frequencies(source, pi, rng, n_samples, kernel=None):
    """
    Empirical trajectory distribution of n_samples rollouts.

    Outputs:
        freq - Dict trajectory key -> relative frequency.
    """

    if n_samples < 1:
        raise InvalidParameterError('need at least one sample')
    counts = Counter(rollout(source, pi, rng, kernel=kernel).key() for _ in range(n_samples))
    logger.debug('%d rollouts visited %d trajectories', n_samples, len(counts))
    return {key: c / n_samples for key, c in counts.items()}


def frequency_zscores(exact, freq, n_samples):
    """
    Standardized gaps (freq - p) / sqrt(p (1 - p) / n) per trajectory of either
    distribution; trajectories with p in {0, 1} get an infinite score on any gap.
    """

    scores = {}
    for key in set(exact) | set(freq):
        p = exact.get(key, 0.0)
        gap = freq.get(key, 0.0) - p
        sd = np.sqrt(p * (1.0 - p) / n_samples)
        scores[key] = abs(gap) / sd if sd > 0 else (0.0 if abs(gap) < 1e-12 else np.inf)
    return scores
