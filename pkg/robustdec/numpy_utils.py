import itertools
import zlib

import numpy as np

__all__ = ['make_rng', 'describe', 'normalize', 'random_simplex',
           'simplex_grid', 'lowest_argmax', 'lowest_argmin']

# entries this close to each other count as ties for arg-selection
TIE_TOL = 1e-12


def make_rng(seed, stream=''):
    """
    Build a counter-based generator for one named random stream of one run.

    Inputs:
        seed - Non-negative integer run seed.
        stream - Name of the stream, e.g. 'policy' or 'env'. Different names give
            independent streams for the same seed. (Default: '')
    Outputs:
        rng - numpy Generator backed by Philox.
    """

    key = zlib.crc32(str(stream).encode('utf-8'))
    seq = np.random.SeedSequence([int(seed), key])
    return np.random.Generator(np.random.Philox(seq))


def describe(x):
    """
    Return the shape, range and datatype of an array as a short string.
    """

    x = np.asarray(x)
    if x.size == 0:
        return '{}, [], {}'.format(x.shape, x.dtype)
    return '{}, [{:.6g}, {:.6g}], {}'.format(x.shape, np.min(x), np.max(x), x.dtype)


def normalize(p, floor=0.0):
    """
    Clip tiny negative round-off and rescale a vector to sum to one.

    Inputs:
        p - Non-negative vector (up to round-off).
        floor - Entries below this value are set to it before rescaling. (Default: 0)
    Outputs:
        p - Copy of p summing to one.
    """

    p = np.maximum(np.asarray(p, dtype=float), floor)
    total = p.sum()
    if total <= 0:
        raise ValueError('cannot normalize a vector with total mass {}'.format(total))
    return p / total


def random_simplex(n, rng, size=None, alpha=1.0):
    """
    Draw points uniformly (alpha=1) from the n-simplex.

    Inputs:
        n - Simplex dimension (number of coordinates).
        rng - numpy Generator.
        size - Number of points. If None, a single vector is returned. (Default: None)
        alpha - Dirichlet concentration. (Default: 1.0)
    """

    return rng.dirichlet(np.full(n, alpha), size=size)


def simplex_grid(n, step):
    """
    Enumerate every point of the n-simplex whose coordinates are multiples of step.

    Inputs:
        n - Number of coordinates.
        step - Grid spacing; 1/step is rounded to the nearest integer.
    Outputs:
        points - Array of shape (n_points, n).
    """

    k = int(round(1.0 / step))
    if n == 1:
        return np.ones((1, 1))
    points = []
    for cut in itertools.combinations(range(k + n - 1), n - 1):
        bounds = (-1,) + cut + (k + n - 1,)
        points.append([bounds[i + 1] - bounds[i] - 1 for i in range(n)])
    return np.asarray(points, dtype=float) / k


def lowest_argmax(x, tol=TIE_TOL):
    """Index of the maximum, preferring the lowest index among near-ties."""
    x = np.asarray(x, dtype=float)
    return int(np.flatnonzero(x >= np.max(x) - tol)[0])


def lowest_argmin(x, tol=TIE_TOL):
    """Index of the minimum, preferring the lowest index among near-ties."""
    x = np.asarray(x, dtype=float)
    return int(np.flatnonzero(x <= np.min(x) + tol)[0])
