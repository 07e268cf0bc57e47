"""
Numerical solvers shared by the belief, DEC and market modules.

exp_grad_minimize is an exponentiated-gradient (entropic mirror descent)
method over a product of simplices with a backtracking step size and a
Frank-Wolfe duality-gap stopping rule. solve_lp is a thin wrapper around
scipy's HiGHS linear programming backend.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .error_utils import InvalidParameterError, SolverQualityError

__all__ = ['MAX_ITER', 'GAP_TOL', 'INTERIOR_FLOOR', 'SolverResult', 'Segments',
           'exp_grad_minimize', 'solve_lp']

logger = logging.getLogger(__name__)

MAX_ITER = 3000
GAP_TOL = 1e-10
# iterates are kept above this value so multiplicative updates can move every coordinate
INTERIOR_FLOOR = 1e-30
MIN_STEP = 1e-16


@dataclass
class SolverResult:
    x: np.ndarray
    value: float
    gap: float
    n_iter: int
    converged: bool


class Segments:
    """
    Partition of a flat vector into consecutive simplex blocks.

    Inputs:
        sizes - Length of every block, in order.
    """

    def __init__(self, sizes):
        sizes = np.asarray(sizes, dtype=int)
        if sizes.ndim != 1 or len(sizes) == 0 or np.any(sizes < 1):
            raise InvalidParameterError('segment sizes must be positive, got {}'.format(sizes))
        self.sizes = sizes
        self.starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.total = int(sizes.sum())
        self.ids = np.repeat(np.arange(len(sizes)), sizes)

    def __len__(self):
        return len(self.sizes)

    def sums(self, v):
        return np.add.reduceat(v, self.starts)

    def mins(self, v):
        return np.minimum.reduceat(v, self.starts)

    def normalize(self, v):
        return v / self.sums(v)[self.ids]

    def uniform(self):
        return 1.0 / self.sizes[self.ids].astype(float)

    def split(self, v):
        return np.split(v, self.starts[1:])

    def gap(self, x, g):
        """Frank-Wolfe gap: sum over blocks of <g, x> minus min g."""
        return float(np.sum(self.sums(g * x) - self.mins(g)))


def _kl(y, x):
    mask = y > 0
    return float(np.sum(y[mask] * (np.log(y[mask]) - np.log(x[mask]))))


def exp_grad_minimize(fun, x0=None, segments=None, max_iter=MAX_ITER, tol=GAP_TOL,
                      step=1.0, raise_on_failure=False):
    """
    Minimize a convex differentiable function over a product of simplices.

    Inputs:
        fun - Callable x -> (value, gradient) on the flat vector.
        x0 - Starting point. If None, the uniform point of every block. (Default: None)
        segments - Segments describing the blocks, or an int for a single simplex of
            that size. Required when x0 is None. (Default: None)
        max_iter - Iteration budget. (Default: MAX_ITER)
        tol - Stop once the Frank-Wolfe gap is below this value. (Default: GAP_TOL)
        step - Initial step size. (Default: 1.0)
        raise_on_failure - If True, raises SolverQualityError when the budget runs
            out above tol. (Default: False)
    Outputs:
        result - SolverResult with the final iterate, value, gap and iteration count.
    """

    if segments is None:
        if x0 is None:
            raise InvalidParameterError('exp_grad_minimize needs x0 or segments')
        segments = Segments([len(x0)])
    elif isinstance(segments, (int, np.integer)):
        segments = Segments([int(segments)])

    if x0 is None:
        x = segments.uniform()
    else:
        x = segments.normalize(np.maximum(np.asarray(x0, dtype=float), INTERIOR_FLOOR))

    f, g = fun(x)
    eta = step
    gap = segments.gap(x, g)
    n_iter = 0
    stalled = False
    while n_iter < max_iter and gap > tol:
        n_iter += 1
        while True:
            shifted = g - segments.mins(g)[segments.ids]
            y = x * np.exp(-eta * shifted)
            y = segments.normalize(np.maximum(segments.normalize(y), INTERIOR_FLOOR))
            fy, gy = fun(y)
            model = f + float(g @ (y - x)) + _kl(y, x) / eta
            if fy <= model + 1e-13 * (1.0 + abs(f)):
                break
            eta *= 0.5
            if eta < MIN_STEP:
                stalled = True
                break
        if stalled:
            break
        x, f, g = y, fy, gy
        gap = segments.gap(x, g)
        eta *= 2.0

    converged = gap <= tol
    logger.debug('exp_grad_minimize: %d iterations, gap %.3g, value %.12g, step %.3g',
                 n_iter, gap, f, eta)
    if not converged:
        if raise_on_failure:
            raise SolverQualityError('mirror descent stopped at gap {:.3g} after {} iterations'.format(
                gap, n_iter))
        logger.debug('mirror descent budget exhausted at gap %.3g', gap)
    return SolverResult(x=x, value=float(f), gap=gap, n_iter=n_iter, converged=converged)


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=(0, None)):
    """
    Solve min c.x subject to linear constraints with the HiGHS backend.

    Outputs:
        x - Optimal point.
        value - Optimal objective value.
    Raises SolverQualityError when HiGHS does not report an optimal solution.
    """

    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method='highs')
    if res.status != 0:
        raise SolverQualityError('linear program failed: {}'.format(res.message))
    return np.asarray(res.x, dtype=float), float(res.fun)
