"""
Robust linear bandits: hypotheses are points z of a box, and the model of z
allows every outcome distribution mu with F(a, z, mu) = 0 for a map F that is
bilinear in (z, mu).
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .belief_utils import LinearConstraints
from .dec_utils import Model, ModelClass
from .error_utils import DimensionError, InfeasibleBeliefError, InfeasiblePointError, InvalidParameterError

__all__ = ['BilinearSpec', 'HypothesisBox', 'model_from_point', 'grid_cover', 'cover_models',
           'cover_count_bound', 'point_label']

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BilinearSpec:
    """
    Coefficients of F(a, z, mu)_w = sum_{j,o} coeff[a][w][j][o] z_j mu(o)
    + sum_o offset[a][w][o] mu(o).

    The offset tensor is the homogeneous coordinate; it lets affine statements
    such as E_mu[r(a, .)] - z = 0 be written in bilinear form.

    Inputs:
        space - OutcomeSpace.
        coeff - Array of shape (n_actions, W_dim, Z_dim, n_outcomes).
        offset - Array of shape (n_actions, W_dim, n_outcomes). (Default: zeros)
    """

    space: object
    coeff: np.ndarray
    offset: np.ndarray = None

    def __post_init__(self):
        coeff = np.array(self.coeff, dtype=float)
        if coeff.ndim != 4 or coeff.shape[3] != self.space.size:
            raise DimensionError('coefficients must have shape (actions, W, Z, {}), got {}'.format(
                self.space.size, coeff.shape))
        if not np.all(np.isfinite(coeff)):
            raise InvalidParameterError('bilinear coefficients must be finite')
        offset = np.zeros((coeff.shape[0], coeff.shape[1], coeff.shape[3])) if self.offset is None \
            else np.array(self.offset, dtype=float)
        if offset.shape != (coeff.shape[0], coeff.shape[1], coeff.shape[3]):
            raise DimensionError('offset must have shape {}, got {}'.format(
                (coeff.shape[0], coeff.shape[1], coeff.shape[3]), offset.shape))
        coeff.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, 'coeff', coeff)
        object.__setattr__(self, 'offset', offset)

    @property
    def n_actions(self):
        return self.coeff.shape[0]

    @property
    def W_dim(self):
        return self.coeff.shape[1]

    @property
    def Z_dim(self):
        return self.coeff.shape[2]

    def rows(self, a, z):
        """Matrix (W_dim, n_outcomes) of F(a, z, .) as linear functionals of mu."""
        return np.einsum('wjo,j->wo', self.coeff[a], z) + self.offset[a]

    def evaluate(self, a, z, mu):
        return self.rows(a, np.asarray(z, dtype=float)) @ np.asarray(mu, dtype=float)


@dataclass(frozen=True)
class HypothesisBox:
    """Axis-aligned box of hypothesis points inside [-1, 1]^Z."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lower)
        hi = tuple(float(x) for x in self.upper)
        if len(lo) != len(hi) or not lo:
            raise DimensionError('box bounds must be non-empty and of equal length')
        if any(l > h for l, h in zip(lo, hi)):
            raise InvalidParameterError('empty box {} .. {}'.format(lo, hi))
        if any(l < -1.0 or h > 1.0 for l, h in zip(lo, hi)):
            raise InvalidParameterError('box must lie within [-1, 1]^Z')
        object.__setattr__(self, 'lower', lo)
        object.__setattr__(self, 'upper', hi)

    @classmethod
    def cube(cls, Z_dim):
        return cls((-1.0,) * Z_dim, (1.0,) * Z_dim)

    @property
    def dim(self):
        return len(self.lower)

    def sample(self, n_samples, rng):
        return rng.uniform(self.lower, self.upper, size=(n_samples, self.dim))


def point_label(z):
    return 'z=(' + ','.join('{:.6g}'.format(v) for v in np.atleast_1d(z)) + ')'


def model_from_point(spec, z, label=None):
    """
    Model of a hypothesis point: arm a is {mu : F(a, z, mu) = 0}.

    Each of the W_dim equalities is stored as a pair of opposite inequalities.

    Inputs:
        spec - BilinearSpec.
        z - Point of length Z_dim.
        label - Model label. If None, derived from z. (Default: None)
    Outputs:
        model - Model with LinearConstraints arms.
    Raises InfeasiblePointError when some arm is empty.
    """

    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape != (spec.Z_dim,):
        raise DimensionError('point has {} coordinates, spec has Z_dim {}'.format(len(z), spec.Z_dim))
    beliefs = []
    for a in range(spec.n_actions):
        rows = spec.rows(a, z)
        constraints = []
        for row in rows:
            constraints.append((row, 0.0))
            constraints.append((-row, 0.0))
        try:
            beliefs.append(LinearConstraints(spec.space, constraints))
        except InfeasibleBeliefError:
            raise InfeasiblePointError('point {} leaves action {} with no distribution'.format(z, a),
                                       point=z, action=a) from None
    return Model(label if label is not None else point_label(z), beliefs)


def grid_cover(box, eps):
    """
    Cell-centered grid covering the box within L2 radius eps.

    Each axis is split into cells of width at most 2 eps / sqrt(Z); a cell's center
    is within eps of every point of the cell.

    Inputs:
        box - HypothesisBox.
        eps - Positive radius.
    Outputs:
        points - Array of shape (n_points, Z_dim).
    """

    if eps <= 0:
        raise InvalidParameterError('covering radius must be positive, got {}'.format(eps))
    spacing = 2.0 * eps / np.sqrt(box.dim)
    axes = []
    for lo, hi in zip(box.lower, box.upper):
        n_cells = max(1, int(np.ceil((hi - lo) / spacing - 1e-12)))
        width = (hi - lo) / n_cells
        axes.append(lo + (np.arange(n_cells) + 0.5) * width)
    return np.asarray(list(itertools.product(*axes)), dtype=float)


def cover_count_bound(box, eps):
    """Upper bound prod_d (side_d sqrt(Z) / (2 eps) + 1) on the size of grid_cover."""
    sides = np.asarray(box.upper) - np.asarray(box.lower)
    return float(np.prod(sides * np.sqrt(box.dim) / (2.0 * eps) + 1.0))


def cover_models(spec, box, eps):
    """
    ModelClass of the feasible grid points of a cover; infeasible points are skipped.

    Outputs:
        H - ModelClass.
        points - Array of the kept points.
    """

    models, kept = [], []
    for z in grid_cover(box, eps):
        try:
            models.append(model_from_point(spec, z))
            kept.append(z)
        except InfeasiblePointError as err:
            logger.info('cover point %s dropped: %s', point_label(z), err)
    if not models:
        raise InfeasiblePointError('no grid point of the cover yields a feasible model')
    return ModelClass(models), np.asarray(kept)
