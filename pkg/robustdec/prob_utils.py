"""
Finite-space probability primitives and Hellinger geometry.

Distributions are thin immutable wrappers around numpy vectors tied to an
OutcomeSpace. Internals of the solvers work on raw arrays; the wrappers are
used at module boundaries so that mismatched spaces are caught early.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .error_utils import DimensionError, InvalidParameterError

__all__ = ['SUM_TOL', 'DENOM_FLOOR', 'OutcomeSpace', 'Dist', 'SubDist',
           'as_probs', 'bhattacharyya', 'hellinger_sq', 'hellinger_sq_grad']

logger = logging.getLogger(__name__)

SUM_TOL = 1e-9
DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class OutcomeSpace:
    """
    Ordered collection of distinct outcome labels.

    Inputs:
        labels - Sequence of hashable labels; stored as a tuple.
    """

    labels: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if len(labels) == 0:
            raise InvalidParameterError('outcome space needs at least one label')
        if len(set(labels)) != len(labels):
            raise InvalidParameterError('outcome labels are not unique: {}'.format(labels))
        object.__setattr__(self, 'labels', labels)

    @property
    def size(self):
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    @classmethod
    def of_size(cls, n, prefix='o'):
        return cls(tuple('{}{}'.format(prefix, i) for i in range(n)))

    @classmethod
    def reward_state(cls, n_states):
        """
        The (reward bit, next state) space used by RMDP cells, ordered with the
        reward bit as the slow index: index = r * n_states + s.
        """
        return cls(tuple((r, s) for r in (0, 1) for s in range(n_states)))


def _readonly(x):
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class Dist:
    """
    Probability vector over an OutcomeSpace.

    Inputs:
        space - OutcomeSpace the vector is indexed by.
        probs - Per-outcome probabilities; must be non-negative and sum to one
            within SUM_TOL.
    """

    space: OutcomeSpace
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = _readonly(self.probs)
        if probs.shape != (self.space.size,):
            raise DimensionError('expected {} probabilities, got shape {}'.format(
                self.space.size, probs.shape))
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise InvalidParameterError('probabilities must be finite and non-negative')
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise InvalidParameterError('probabilities sum to {!r}, not 1'.format(probs.sum()))
        object.__setattr__(self, 'probs', probs)

    @classmethod
    def from_weights(cls, space, weights):
        """Normalize non-negative weights (round-off negatives are clipped) into a Dist."""
        w = np.maximum(np.asarray(weights, dtype=float), 0.0)
        return cls(space, w / w.sum())

    @classmethod
    def uniform(cls, space):
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def point(cls, space, index):
        probs = np.zeros(space.size)
        probs[index] = 1.0
        return cls(space, probs)

    def expect(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape != self.probs.shape:
            raise DimensionError('function has shape {}, space has {} outcomes'.format(
                f.shape, self.space.size))
        return float(self.probs @ f)

    def __getitem__(self, label):
        return float(self.probs[self.space.index(label)])

    def __eq__(self, other):
        return (isinstance(other, Dist) and other.space == self.space
                and np.array_equal(other.probs, self.probs))

    def __hash__(self):
        return hash((self.space, self.probs.tobytes()))

    def __repr__(self):
        return 'Dist({})'.format(np.array2string(self.probs, precision=6))


@dataclass(frozen=True, eq=False)
class SubDist:
    """Non-negative measure with total mass at most one."""

    space: OutcomeSpace
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        mass = _readonly(self.mass)
        if mass.shape != (self.space.size,):
            raise DimensionError('expected {} entries, got shape {}'.format(
                self.space.size, mass.shape))
        if np.any(mass < 0) or mass.sum() > 1.0 + SUM_TOL:
            raise InvalidParameterError('sub-distribution mass must be non-negative with total <= 1')
        object.__setattr__(self, 'mass', mass)

    @property
    def total(self):
        return float(self.mass.sum())

    def __repr__(self):
        return 'SubDist({})'.format(np.array2string(self.mass, precision=6))


def as_probs(x, space=None):
    """
    Return the probability vector of a Dist or array, checking its space.

    Inputs:
        x - Dist or array-like.
        space - If given, the expected OutcomeSpace (for a Dist) or size (for arrays).
    Outputs:
        probs - float numpy array.
    """

    if isinstance(x, Dist):
        if space is not None and x.space != space:
            raise DimensionError('distribution over {} used where {} was expected'.format(
                x.space.labels, space.labels))
        return x.probs
    probs = np.asarray(x, dtype=float)
    if space is not None and probs.shape != (space.size,):
        raise DimensionError('expected {} entries, got shape {}'.format(space.size, probs.shape))
    return probs


def _pair(mu, nu):
    if isinstance(mu, Dist) and isinstance(nu, Dist) and mu.space != nu.space:
        raise DimensionError('distributions live on different outcome spaces')
    p, q = as_probs(mu), as_probs(nu)
    if p.shape != q.shape:
        raise DimensionError('shapes {} and {} differ'.format(p.shape, q.shape))
    return p, q


def bhattacharyya(mu, nu):
    """Bhattacharyya coefficient sum_o sqrt(mu(o) nu(o))."""
    p, q = _pair(mu, nu)
    return float(np.sqrt(np.maximum(p, 0) * np.maximum(q, 0)).sum())


def hellinger_sq(mu, nu):
    """
    Squared Hellinger distance 1 - sum_o sqrt(mu(o) nu(o)) on a finite space.

    Inputs:
        mu, nu - Dist objects on the same space, or equal-length arrays.
    Outputs:
        d - Real in [0, 1].
    """

    return float(np.clip(1.0 - bhattacharyya(mu, nu), 0.0, 1.0))


def hellinger_sq_grad(mu, nu):
    """
    Gradient of nu -> hellinger_sq(mu, nu), i.e. -1/2 sqrt(mu/nu).

    Denominators are floored at DENOM_FLOOR; a debug record is emitted when the
    floor is active on a coordinate where mu is positive.
    """

    p, q = _pair(mu, nu)
    clamped = (q < DENOM_FLOOR) & (p > 0)
    if np.any(clamped):
        logger.debug('clamped %d denominators in Hellinger gradient', int(clamped.sum()))
    return -0.5 * np.sqrt(p / np.maximum(q, DENOM_FLOOR))
