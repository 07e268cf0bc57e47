"""
Imprecise beliefs: nonempty closed convex sets of distributions on a finite
outcome space, and the convex oracles the rest of the package needs.

Backends
    VertexSet          convex hull of listed distributions
    LinearConstraints  {mu in simplex : coeffs_k . mu >= lower_k for all k}
    Halfspace          {mu in simplex : g . mu >= c}
    Fattened           {mu : D_H(mu -> base) <= radius}
    Singleton          {nu}
    FullSimplex        the whole simplex

Every backend except Fattened exposes its extreme points through vertices().
Oracles are pure functions of immutable beliefs; vertex lists are computed
once per belief and cached.
"""

import itertools
import logging
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, minimize

from .error_utils import (DimensionError, InfeasibleBeliefError, InvalidParameterError,
                          SolverQualityError, UnsupportedBackendError)
from .numpy_utils import lowest_argmin, normalize
from .prob_utils import DENOM_FLOOR, Dist, OutcomeSpace, as_probs
from .solver_utils import GAP_TOL, MAX_ITER, Segments, exp_grad_minimize, solve_lp

__all__ = ['ABS_TOL', 'MAX_ENUM_OUTCOMES', 'ImpreciseBelief', 'VertexSet',
           'LinearConstraints', 'Halfspace', 'Fattened', 'Singleton', 'FullSimplex',
           'worst_case_expectation', 'hellinger_project', 'asym_dist_sq',
           'minimize_mixed_distance', 'enumerate_vertices']

logger = logging.getLogger(__name__)

ABS_TOL = 1e-8
# vertex enumeration is combinatorial; above this size LPs are used instead
MAX_ENUM_OUTCOMES = 12


def _check_space(space):
    if not isinstance(space, OutcomeSpace):
        raise InvalidParameterError('expected an OutcomeSpace, got {!r}'.format(space))
    return space


def _in_simplex(mu, tol):
    return bool(np.all(mu >= -tol) and abs(mu.sum() - 1.0) <= max(tol, 1e-6))


def enumerate_vertices(A, b, tol=ABS_TOL):
    """
    Vertices of {mu in simplex : A mu >= b}.

    Every vertex makes n-1 of the inequalities (mu_o >= 0 and the rows of A) tight
    together with sum(mu) = 1. All such systems are solved and the feasible,
    distinct solutions kept.

    Inputs:
        A - Constraint matrix of shape (K, n). May have zero rows.
        b - Lower bounds of shape (K,).
        tol - Feasibility tolerance. (Default: ABS_TOL)
    Outputs:
        vertices - Array of shape (n_vertices, n), sorted so that points with more
            mass on low-index outcomes come first.
    """

    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    b = np.asarray(b, dtype=float).reshape(-1)
    n = A.shape[1]
    rows = np.vstack([np.eye(n), A])
    rhs = np.concatenate([np.zeros(n), b])

    found = {}
    for active in itertools.combinations(range(len(rows)), n - 1):
        M = np.vstack([rows[list(active)], np.ones((1, n))])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        mu = np.linalg.solve(M, np.concatenate([rhs[list(active)], [1.0]]))
        if np.all(mu >= -tol) and np.all(A @ mu >= b - tol):
            mu = normalize(np.where(mu < 0, 0.0, mu))
            key = tuple(np.round(mu, 9))
            found.setdefault(key, mu)

    if not found:
        return np.zeros((0, n))
    keys = sorted(found, key=lambda k: tuple(-v for v in k))
    return np.asarray([found[k] for k in keys])


class ImpreciseBelief:
    """
    Base class of the belief backends.

    Subclasses set self.space and implement contains(). Vertex-exposing backends
    implement _vertices(); the default oracles below work from the vertex list.
    """

    is_vertex_exposing = True

    @property
    def size(self):
        return self.space.size

    def _check(self, x):
        if isinstance(x, Dist) and x.space != self.space:
            raise DimensionError('distribution over {} used with a belief over {}'.format(
                x.space.labels, self.space.labels))
        x = as_probs(x)
        if x.shape != (self.size,):
            raise DimensionError('expected a vector of length {}, got shape {}'.format(
                self.size, x.shape))
        return x

    @cached_property
    def _vertex_cache(self):
        V = np.asarray(self._vertices(), dtype=float)
        V.setflags(write=False)
        return V

    def vertices(self):
        """
        Extreme points of the set as an array of shape (n_vertices, n).
        """
        if not self.is_vertex_exposing:
            raise UnsupportedBackendError('{} does not expose vertices'.format(type(self).__name__))
        return self._vertex_cache

    def _vertices(self):
        raise NotImplementedError

    def contains(self, mu, tol=ABS_TOL):
        raise NotImplementedError

    def worst_case(self, f):
        """
        Minimum of E_mu[f] over members and a minimizing member (lowest-index vertex).
        """
        f = self._check(f)
        V = self.vertices()
        vals = V @ f
        i = lowest_argmin(vals)
        return float(vals[i]), V[i].copy()

    def project(self, target):
        """
        Hellinger projection of target onto the set.

        Outputs:
            point - Member minimizing hellinger_sq(target, point).
            dist_sq - The minimal squared distance.
        """
        t = self._check(target)
        if self.contains(t):
            return t.copy(), 0.0
        return _project_onto_vertices(t, self.vertices())

    def sample(self, n_samples, rng):
        """
        Random members: Dirichlet mixtures of the vertices.
        """
        V = self.vertices()
        if len(V) == 1:
            return np.repeat(V, n_samples, axis=0)
        W = rng.dirichlet(np.ones(len(V)), size=n_samples)
        return W @ V

    def to_vertex_set(self):
        return VertexSet(self.space, self.vertices())


class VertexSet(ImpreciseBelief):
    """
    Convex hull of a finite list of distributions.

    Inputs:
        space - OutcomeSpace.
        points - Array-like of shape (k, n) or list of Dist; rows must be distributions.
    """

    def __init__(self, space, points):
        self.space = _check_space(space)
        rows = [as_probs(p, space) if isinstance(p, Dist) else np.asarray(p, dtype=float)
                for p in points]
        if len(rows) == 0:
            raise InfeasibleBeliefError('a vertex set needs at least one point')
        P = np.vstack(rows)
        if P.shape[1] != space.size:
            raise DimensionError('points have {} coordinates, space has {}'.format(
                P.shape[1], space.size))
        for p in P:
            if not _in_simplex(p, 1e-9):
                raise InvalidParameterError('vertex {} is not a distribution'.format(p))
        P = np.maximum(P, 0.0)
        P = P / P.sum(axis=1, keepdims=True)
        _, keep = np.unique(np.round(P, 12), axis=0, return_index=True)
        self.points = P[np.sort(keep)]
        self.points.setflags(write=False)

    def _vertices(self):
        return self.points

    def contains(self, mu, tol=ABS_TOL):
        mu = self._check(mu)
        if not _in_simplex(mu, tol):
            return False
        V = self.points
        k, n = V.shape
        if k == 1:
            return bool(np.max(np.abs(V[0] - mu)) <= tol)
        # min ||V^T w - mu||_1 over the simplex of weights
        c = np.concatenate([np.zeros(k), np.ones(2 * n)])
        A_eq = np.vstack([np.hstack([V.T, np.eye(n), -np.eye(n)]),
                          np.concatenate([np.ones(k), np.zeros(2 * n)])])
        b_eq = np.concatenate([mu, [1.0]])
        _, resid = solve_lp(c, A_eq=A_eq, b_eq=b_eq)
        return resid <= tol * n

    def __repr__(self):
        return 'VertexSet({} points over {} outcomes)'.format(len(self.points), self.size)


class LinearConstraints(ImpreciseBelief):
    """
    Intersection of the simplex with halfspaces coeffs . mu >= lower.

    Inputs:
        space - OutcomeSpace.
        constraints - Iterable of (coeff_vector, lower_bound) pairs. Equalities are
            written as two opposite inequalities.
    """

    def __init__(self, space, constraints):
        self.space = _check_space(space)
        constraints = list(constraints)
        n = space.size
        if constraints:
            self.A = np.asarray([np.asarray(a, dtype=float) for a, _ in constraints])
            self.b = np.asarray([float(lb) for _, lb in constraints])
        else:
            self.A = np.zeros((0, n))
            self.b = np.zeros(0)
        if self.A.shape[1] != n:
            raise DimensionError('constraint rows have {} entries, space has {}'.format(
                self.A.shape[1], n))
        self.A.setflags(write=False)
        self.b.setflags(write=False)
        self._check_feasible()

    def _check_feasible(self):
        if len(self.b) == 0:
            return
        n = self.size
        try:
            solve_lp(np.zeros(n), A_ub=-self.A, b_ub=-(self.b - ABS_TOL),
                     A_eq=np.ones((1, n)), b_eq=[1.0])
        except SolverQualityError:
            raise InfeasibleBeliefError('linear constraints leave no distribution') from None

    @property
    def constraints(self):
        return list(zip(self.A, self.b))

    def _vertices(self):
        V = enumerate_vertices(self.A, self.b)
        if len(V) == 0:
            # constraints are feasible only within ABS_TOL
            V = enumerate_vertices(self.A, self.b - ABS_TOL, tol=10 * ABS_TOL)
        return V

    def contains(self, mu, tol=ABS_TOL):
        mu = self._check(mu)
        return _in_simplex(mu, tol) and bool(np.all(self.A @ mu >= self.b - tol))

    def _single_cut(self, t):
        """The one violated constraint when the set is a halfspace or hyperplane slice."""
        if len(self.b) == 1:
            return self.A[0], self.b[0]
        if (len(self.b) == 2 and np.allclose(self.A[0], -self.A[1])
                and np.isclose(self.b[0], -self.b[1])):
            k = 0 if self.A[0] @ t < self.b[0] else 1
            return self.A[k], self.b[k]
        return None

    def project(self, target):
        t = self._check(target)
        if self.contains(t):
            return t.copy(), 0.0
        cut = self._single_cut(t) if np.all(t > 0) else None
        if cut is not None:
            nu = _project_halfspace_interior(t, cut[0], cut[1])
            return nu, float(np.clip(1.0 - np.sqrt(t * nu).sum(), 0.0, 1.0))
        return _project_onto_vertices(t, self.vertices())

    def worst_case(self, f):
        f = self._check(f)
        if self.size <= MAX_ENUM_OUTCOMES:
            return super().worst_case(f)
        n = self.size
        x, val = solve_lp(f, A_ub=-self.A, b_ub=-self.b, A_eq=np.ones((1, n)), b_eq=[1.0])
        return val, normalize(x)

    def __repr__(self):
        return 'LinearConstraints({} constraints over {} outcomes)'.format(len(self.b), self.size)


class Halfspace(LinearConstraints):
    """
    The set {mu : E_mu[g] >= c}.

    Inputs:
        space - OutcomeSpace.
        g - Value vector.
        c - Threshold; must not exceed max(g).
    """

    def __init__(self, space, g, c):
        g = np.asarray(g, dtype=float)
        if g.shape != (space.size,):
            raise DimensionError('value vector has shape {}, space has {} outcomes'.format(
                g.shape, space.size))
        if c > g.max() + ABS_TOL:
            raise InfeasibleBeliefError('threshold {} exceeds the largest value {}'.format(c, g.max()))
        self.g = g
        self.c = float(c)
        super().__init__(space, [(g, c)])

    def _check_feasible(self):
        pass

    def _vertices(self):
        g, c = self.g, self.c
        n = self.size
        above = [i for i in range(n) if g[i] >= c - ABS_TOL]
        below = [j for j in range(n) if g[j] < c - ABS_TOL]
        points = [np.eye(n)[i] for i in above]
        for i in above:
            if g[i] <= c + ABS_TOL:
                continue
            for j in below:
                lam = (c - g[j]) / (g[i] - g[j])
                p = np.zeros(n)
                p[i], p[j] = lam, 1.0 - lam
                points.append(p)
        return np.asarray(points)

    def worst_case(self, f):
        return ImpreciseBelief.worst_case(self, f)

    def __repr__(self):
        return 'Halfspace(g={}, c={:.6g})'.format(np.array2string(self.g, precision=4), self.c)


class Singleton(ImpreciseBelief):
    def __init__(self, space, point):
        self.space = _check_space(space)
        p = as_probs(point, space) if isinstance(point, Dist) else np.asarray(point, dtype=float)
        if p.shape != (space.size,):
            raise DimensionError('point has shape {}, space has {} outcomes'.format(p.shape, space.size))
        if not _in_simplex(p, 1e-9):
            raise InvalidParameterError('singleton point {} is not a distribution'.format(p))
        self.point = normalize(p)
        self.point.setflags(write=False)

    def _vertices(self):
        return self.point[None, :]

    def contains(self, mu, tol=ABS_TOL):
        mu = self._check(mu)
        return bool(np.max(np.abs(mu - self.point)) <= tol)

    def project(self, target):
        t = self._check(target)
        return self.point.copy(), float(np.clip(1.0 - np.sqrt(t * self.point).sum(), 0.0, 1.0))

    def __repr__(self):
        return 'Singleton({})'.format(np.array2string(self.point, precision=6))


class FullSimplex(ImpreciseBelief):
    def __init__(self, space):
        self.space = _check_space(space)

    def _vertices(self):
        return np.eye(self.size)

    def contains(self, mu, tol=ABS_TOL):
        return _in_simplex(self._check(mu), tol)

    def project(self, target):
        t = self._check(target)
        return t.copy(), 0.0

    def sample(self, n_samples, rng):
        return rng.dirichlet(np.ones(self.size), size=n_samples)

    def __repr__(self):
        return 'FullSimplex({} outcomes)'.format(self.size)


class Fattened(ImpreciseBelief):
    """
    Hellinger neighbourhood {mu : D_H(mu -> base) <= radius} of a base belief.

    In square-root coordinates distributions are points on the unit sphere and
    1 - hellinger_sq is the cosine of the angle between them, so the set is the
    angular neighbourhood of the base's image with angle arccos(1 - radius^2).

    Inputs:
        base - ImpreciseBelief.
        radius - Hellinger radius in [0, 1].
    """

    is_vertex_exposing = False

    def __init__(self, base, radius):
        if not isinstance(base, ImpreciseBelief):
            raise InvalidParameterError('base must be an ImpreciseBelief')
        if not 0.0 <= radius <= 1.0:
            raise InvalidParameterError('radius must lie in [0, 1], got {}'.format(radius))
        self.base = base
        self.space = base.space
        self.radius = float(radius)
        self.radius_sq = self.radius ** 2
        self.angle = float(np.arccos(1.0 - self.radius_sq))

    def contains(self, mu, tol=ABS_TOL):
        mu = self._check(mu)
        if not _in_simplex(mu, tol):
            return False
        if self.radius == 0.0:
            return self.base.contains(mu, tol)
        _, d2 = self.base.project(mu)
        return d2 <= self.radius_sq + tol

    def project(self, target):
        t = self._check(target)
        nu, d2 = self.base.project(t)
        if d2 <= self.radius_sq:
            return t.copy(), 0.0
        theta = float(np.arccos(np.clip(1.0 - d2, -1.0, 1.0)))
        # slerp from sqrt(nu) toward sqrt(t) by the fattening angle
        x = (np.sin(theta - self.angle) * np.sqrt(nu) + np.sin(self.angle) * np.sqrt(t)) / np.sin(theta)
        point = normalize(x ** 2)
        return point, float(np.clip(1.0 - np.cos(theta - self.angle), 0.0, 1.0))

    def worst_case(self, f):
        f = self._check(f)
        if self.radius_sq >= 1.0 or isinstance(self.base, FullSimplex):
            i = lowest_argmin(f)
            return float(f[i]), np.eye(self.size)[i]

        base_val, base_point = self.base.worst_case(f)
        start = 0.999 * base_point + 0.001 / self.size

        def gap(mu):
            mu = np.maximum(mu, DENOM_FLOOR)
            _, d2 = self.base.project(mu / mu.sum())
            return self.radius_sq - d2

        def gap_jac(mu):
            mu = np.maximum(mu, DENOM_FLOOR)
            nu, _ = self.base.project(mu / mu.sum())
            return 0.5 * np.sqrt(nu / mu)

        res = minimize(lambda mu: float(f @ mu), start, jac=lambda mu: f, method='SLSQP',
                       bounds=[(0.0, 1.0)] * self.size,
                       constraints=[{'type': 'eq', 'fun': lambda mu: mu.sum() - 1.0},
                                    {'type': 'ineq', 'fun': gap, 'jac': gap_jac}],
                       options={'ftol': 1e-12, 'maxiter': 300})
        mu = normalize(np.maximum(res.x, 0.0))
        if not self.contains(mu):
            mu, _ = self.project(mu)
        val = float(f @ mu)
        if val > base_val:
            return base_val, base_point.copy()
        return val, mu

    def sample(self, n_samples, rng):
        draws = rng.dirichlet(np.ones(self.size), size=n_samples)
        return np.asarray([self.project(d)[0] for d in draws])

    def __repr__(self):
        return 'Fattened({!r}, radius={:.6g})'.format(self.base, self.radius)


def _project_halfspace_interior(t, g, c):
    """
    Exact Hellinger projection of a full-support t onto {g . nu >= c}, g . t < c.

    Stationarity gives nu_o proportional to t_o / (1 - beta g'_o)^2 with g' = g - min g
    and beta in [0, 1/max g'); g' . nu increases with beta, so one monotone root
    search in beta (parametrized through log(1 - beta max g')) pins the solution.
    """

    shift = g.min()
    gs, cs = g - shift, c - shift
    G = gs.max()
    top = gs >= G - 1e-12
    if G <= 0 or cs >= G - 1e-12:
        return normalize(np.where(top, t, 0.0))

    def tilted(s):
        tau = np.exp(s)
        w = t / (1.0 - (1.0 - tau) * gs / G) ** 2
        return w / w.sum()

    def excess(s):
        return float(gs @ tilted(s)) - cs

    lo = np.log(1e-16)
    if excess(lo) < 0:
        return normalize(np.where(top, t, 0.0))
    s = brentq(excess, lo, 0.0, xtol=1e-15, rtol=1e-14, maxiter=500)
    return tilted(s)


def _project_onto_vertices(t, V, max_iter=MAX_ITER, tol=GAP_TOL):
    """Minimize hellinger_sq(t, V^T w) over mixture weights w."""
    if len(V) == 1:
        nu = V[0].copy()
        return nu, float(np.clip(1.0 - np.sqrt(t * nu).sum(), 0.0, 1.0))

    # start from the vertex with the largest Bhattacharyya coefficient
    scores = np.sqrt(t[None, :] * V).sum(axis=1)
    w0 = np.full(len(V), 0.1 / len(V))
    w0[int(np.argmax(scores))] += 0.9

    def fun(w):
        nu = np.maximum(w @ V, DENOM_FLOOR)
        root = np.sqrt(t * nu)
        return 1.0 - root.sum(), -0.5 * V @ np.sqrt(t / nu)

    res = exp_grad_minimize(fun, w0, max_iter=max_iter, tol=tol)
    nu = normalize(res.x @ V)
    return nu, float(np.clip(1.0 - np.sqrt(t * nu).sum(), 0.0, 1.0))


def _same_space(a, b):
    if a.space != b.space:
        raise DimensionError('beliefs live on different outcome spaces')


def worst_case_expectation(psi, f):
    """
    Worst-case expectation min over mu in psi of E_mu[f].

    Inputs:
        psi - ImpreciseBelief.
        f - Per-outcome values.
    Outputs:
        value - The minimum.
        witness - Dist attaining it.
    """

    value, witness = psi.worst_case(as_probs(f))
    return value, Dist.from_weights(psi.space, witness)


def hellinger_project(target, phi):
    """
    Closest member of phi to target in Hellinger distance.

    Inputs:
        target - Dist (or array) on phi's space.
        phi - ImpreciseBelief.
    Outputs:
        point - Dist in phi.
        dist_sq - hellinger_sq(target, point).
    """

    point, d2 = phi.project(target)
    return Dist.from_weights(phi.space, point), d2


def asym_dist_sq(psi, phi, n_samples=None, rng=None, return_exact=False):
    """
    Asymmetric squared distance max over mu in psi of min over nu in phi of D^2(mu, nu).

    The inner distance is convex in mu, so for vertex-exposing psi the maximum sits
    at a vertex. Other backends are only supported through sampling, which gives
    a lower bound.

    Inputs:
        psi, phi - ImpreciseBelief objects on the same space.
        n_samples - Number of sampled members of psi when psi exposes no vertices.
            (Default: None)
        rng - numpy Generator for the sampling fallback. (Default: None)
        return_exact - If True, also returns whether the value is exact. (Default: False)
    Outputs:
        d2 - The distance (or its sampled lower bound).
        exact - Only if return_exact; False for the sampling fallback.
    """

    _same_space(psi, phi)
    if psi.is_vertex_exposing:
        points, exact = psi.vertices(), True
    elif n_samples:
        if rng is None:
            raise InvalidParameterError('the sampling fallback needs an rng')
        points, exact = psi.sample(n_samples, rng), False
        logger.info('asym_dist_sq: sampled lower bound over %d members of %r', n_samples, psi)
    else:
        raise UnsupportedBackendError(
            'asym_dist_sq needs a vertex-exposing left argument, got {}; pass n_samples to '
            'request a sampled lower bound'.format(type(psi).__name__))

    d2 = max(phi.project(p)[1] for p in points)
    if return_exact:
        return d2, exact
    return d2


def minimize_mixed_distance(n, terms, linear=None, x0=None, max_iter=MAX_ITER, tol=GAP_TOL,
                            return_result=False):
    """
    Minimize sum_i coef_i * D^2(mu -> belief_i) + linear . mu over the n-simplex.

    D^2(mu -> belief) = min over nu in belief of hellinger_sq(mu, nu) is jointly
    convex in (mu, nu). Vertex-exposing beliefs get a block of mixture weights and
    the whole problem is solved jointly by exponentiated gradient; Singleton terms
    are explicit; Fattened terms are evaluated through their projection.

    Inputs:
        n - Outcome count.
        terms - Iterable of (coef, belief) pairs with coef >= 0.
        linear - Per-outcome linear coefficients. (Default: zeros)
        x0 - Warm start for the flat (mu, weights) vector, e.g. the x of a previous
            result with the same terms. Ignored when its length differs. (Default: None)
        max_iter, tol - Solver budget and Frank-Wolfe gap tolerance.
        return_result - If True, also returns the SolverResult. (Default: False)
    Outputs:
        mu - Minimizer (numpy array).
        value - Objective value at mu.
    """

    lin = np.zeros(n) if linear is None else np.asarray(linear, dtype=float)
    if lin.shape != (n,):
        raise DimensionError('linear term has shape {}, expected ({},)'.format(lin.shape, n))

    single_c, single_p, block_c, block_v, fat = [], [], [], [], []
    for coef, belief in terms:
        if coef <= 0 or isinstance(belief, FullSimplex):
            continue
        if belief.size != n:
            raise DimensionError('belief over {} outcomes in a problem over {}'.format(belief.size, n))
        if isinstance(belief, Singleton):
            single_c.append(coef)
            single_p.append(belief.point)
        elif belief.is_vertex_exposing:
            V = belief.vertices()
            if len(V) == 1:
                single_c.append(coef)
                single_p.append(V[0])
            else:
                block_c.append(coef)
                block_v.append(V)
        else:
            fat.append((coef, belief))

    single_c = np.asarray(single_c)
    single_p = np.asarray(single_p).reshape(-1, n)
    block_c = np.asarray(block_c)
    sizes = [len(V) for V in block_v]
    V_all = np.hstack([V.T for V in block_v]) if block_v else np.zeros((n, 0))
    v_seg = Segments(sizes) if block_v else None
    segments = Segments([n] + sizes)

    def fun(x):
        mu = np.maximum(x[:n], DENOM_FLOOR)
        value = float(lin @ mu)
        grad = np.zeros_like(x)
        grad[:n] = lin
        if len(single_c):
            value += float(np.sum(single_c * (1.0 - np.sqrt(single_p * mu).sum(axis=1))))
            grad[:n] -= 0.5 * (single_c[:, None] * np.sqrt(single_p / mu)).sum(axis=0)
        if v_seg is not None:
            w = x[n:]
            nus = np.maximum(np.add.reduceat(V_all * w, v_seg.starts, axis=1), DENOM_FLOOR)
            value += float(np.sum(block_c * (1.0 - np.sqrt(mu[:, None] * nus).sum(axis=0))))
            grad[:n] -= 0.5 * (np.sqrt(nus / mu[:, None]) * block_c).sum(axis=1)
            ratio = np.sqrt(mu[:, None] / nus)[:, v_seg.ids]
            grad[n:] = -0.5 * block_c[v_seg.ids] * np.sum(V_all * ratio, axis=0)
        for coef, belief in fat:
            d2, g = _fattened_value_grad(mu, belief)
            value += coef * d2
            grad[:n] += coef * g
        return value, grad

    if x0 is None or len(x0) != segments.total:
        x0 = segments.uniform()
    res = exp_grad_minimize(fun, x0, segments=segments, max_iter=max_iter, tol=tol)
    mu = normalize(res.x[:n])
    if not res.converged:
        logger.debug('minimize_mixed_distance: stopped at gap %.3g after %d iterations', res.gap, res.n_iter)
    if return_result:
        return mu, res.value, res
    return mu, res.value


def _fattened_value_grad(mu, belief):
    nu, d2 = belief.base.project(mu)
    if d2 <= belief.radius_sq:
        return 0.0, np.zeros_like(mu)
    theta = float(np.arccos(np.clip(1.0 - d2, -1.0, 1.0)))
    scale = np.sin(theta - belief.angle) / np.sin(theta)
    value = 1.0 - np.cos(theta - belief.angle)
    return float(value), -0.5 * scale * np.sqrt(nu / mu)
