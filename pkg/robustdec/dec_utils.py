"""
Model values and decision-estimation coefficients for finite hypothesis
classes over finite action spaces.

The offset coefficient is an epigraph linear program in (p, t); the fuzzy
coefficient is the one-dimensional minimum over gamma of the clipped offset
coefficient plus gamma * eps^2. Both have table-level entry points so that
episodic problems (policies as actions) reuse the same solvers.
"""

import logging

import numpy as np
from scipy.optimize import minimize_scalar

from .belief_utils import ImpreciseBelief, Singleton, asym_dist_sq, worst_case_expectation
from .error_utils import DimensionError, InvalidParameterError
from .numpy_utils import lowest_argmax, lowest_argmin, normalize, random_simplex
from .prob_utils import Dist, OutcomeSpace
from .solver_utils import solve_lp

__all__ = ['GAMMA_BRACKET', 'RewardFn', 'Model', 'ModelClass', 'Belief', 'LossFn',
           'model_values', 'belief_values', 'reduce_belief', 'loss_table',
           'offset_dec_from_tables', 'offset_dec', 'fuzzy_dec_from_tables', 'fuzzy_dec',
           'fuzzy_dec_lower_bound']

logger = logging.getLogger(__name__)

GAMMA_BRACKET = (1e-4, 1e6)
GAMMA_GRID = 41
GAMMA_RTOL = 1e-4


class RewardFn:
    """
    Known reward r(a, o) in [0, 1].

    Inputs:
        table - Array of shape (n_actions, n_outcomes).
        space - OutcomeSpace of the outcomes. If None, a default one is made. (Default: None)
        actions - Action labels. If None, integers are used. (Default: None)
    """

    def __init__(self, table, space=None, actions=None):
        table = np.array(table, dtype=float)
        if table.ndim != 2:
            raise DimensionError('reward table must be 2-D, got shape {}'.format(table.shape))
        if np.any(table < 0) or np.any(table > 1):
            raise InvalidParameterError('rewards must lie in [0, 1]')
        table.setflags(write=False)
        self.table = table
        self.space = space if space is not None else OutcomeSpace.of_size(table.shape[1])
        if self.space.size != table.shape[1]:
            raise DimensionError('reward table has {} outcome columns, space has {}'.format(
                table.shape[1], self.space.size))
        self.actions = tuple(actions) if actions is not None else tuple(range(table.shape[0]))
        if len(self.actions) != table.shape[0]:
            raise DimensionError('{} action labels for {} reward rows'.format(
                len(self.actions), table.shape[0]))

    @property
    def n_actions(self):
        return self.table.shape[0]

    def row(self, a):
        return self.table[a]

    def __call__(self, a, o):
        return float(self.table[a, o])


class Model:
    """
    Robust model: one imprecise belief per action.

    Inputs:
        label - Hashable label, unique within a class.
        beliefs - Sequence of ImpreciseBelief, one per action, all on one space.
    """

    def __init__(self, label, beliefs):
        beliefs = tuple(beliefs)
        if not beliefs:
            raise InvalidParameterError('model {!r} has no actions'.format(label))
        space = beliefs[0].space
        for b in beliefs:
            if not isinstance(b, ImpreciseBelief):
                raise InvalidParameterError('model {!r} has a non-belief arm {!r}'.format(label, b))
            if b.space != space:
                raise DimensionError('model {!r} mixes outcome spaces'.format(label))
        self.label = label
        self.beliefs = beliefs
        self.space = space

    @property
    def n_actions(self):
        return len(self.beliefs)

    def __getitem__(self, a):
        return self.beliefs[a]

    def __repr__(self):
        return 'Model({!r}, {} actions)'.format(self.label, self.n_actions)


class ModelClass:
    """
    Finite hypothesis class of models with distinct labels over shared spaces.
    """

    def __init__(self, models):
        models = tuple(models)
        if not models:
            raise InvalidParameterError('a model class needs at least one model')
        labels = [m.label for m in models]
        if len(set(labels)) != len(labels):
            raise InvalidParameterError('model labels are not distinct: {}'.format(labels))
        first = models[0]
        for m in models[1:]:
            if m.space != first.space or m.n_actions != first.n_actions:
                raise DimensionError('model {!r} does not share spaces with {!r}'.format(
                    m.label, first.label))
        self.models = models
        self._index = {m.label: i for i, m in enumerate(models)}

    @property
    def labels(self):
        return [m.label for m in self.models]

    @property
    def space(self):
        return self.models[0].space

    @property
    def n_actions(self):
        return self.models[0].n_actions

    def index(self, label):
        return self._index[label]

    def get(self, label):
        return self.models[self._index[label]]

    def subset(self, labels):
        """Models whose labels are in labels, in class order; may be empty (a list)."""
        keep = set(labels)
        return [m for m in self.models if m.label in keep]

    def __len__(self):
        return len(self.models)

    def __iter__(self):
        return iter(self.models)

    def __getitem__(self, i):
        return self.models[i]


class Belief:
    """
    Per-action belief used by the learner: either Dist (probabilistic) or
    ImpreciseBelief for every action.
    """

    def __init__(self, arms):
        arms = tuple(arms)
        if not arms:
            raise InvalidParameterError('a belief needs at least one action')
        self.arms = arms
        self.is_probabilistic = all(isinstance(x, Dist) for x in arms)
        if not self.is_probabilistic and not all(isinstance(x, (Dist, ImpreciseBelief)) for x in arms):
            raise InvalidParameterError('belief arms must be Dist or ImpreciseBelief')
        self.space = arms[0].space

    @classmethod
    def from_model(cls, model):
        return cls(model.beliefs)

    @property
    def n_actions(self):
        return len(self.arms)

    def as_imprecise(self, a):
        arm = self.arms[a]
        return Singleton(arm.space, arm.probs) if isinstance(arm, Dist) else arm

    def __getitem__(self, a):
        return self.arms[a]


class LossFn:
    """
    Divergence between the learner's belief and a hypothesis at one action.

    The default is the asymmetric squared Hellinger distance from the belief's arm
    to the model's arm. A custom callable (belief, model, action) -> float may be
    supplied; its values are checked to be non-negative.
    """

    def __init__(self, custom=None, name=None):
        self.custom = custom
        self.name = name or ('custom' if custom is not None else 'hellinger_sq')

    @classmethod
    def hellinger_sq(cls):
        return cls()

    def __call__(self, belief, model, a):
        if self.custom is not None:
            value = float(self.custom(belief, model, a))
        else:
            value = asym_dist_sq(belief.as_imprecise(a), model[a])
        if value < 0:
            raise InvalidParameterError('loss {} returned {} < 0'.format(self.name, value))
        return value

    def __repr__(self):
        return 'LossFn({})'.format(self.name)


def _check_reward(space, n_actions, r):
    if r.space.size != space.size or r.n_actions != n_actions:
        raise DimensionError('reward table shape {} does not match {} actions over {} outcomes'.format(
            r.table.shape, n_actions, space.size))


def model_values(M, r):
    """
    Maximin expected rewards of a model.

    Inputs:
        M - Model.
        r - RewardFn.
    Outputs:
        f - Per-action worst-case expected reward.
        maxf - max_a f(a).
        best - Lowest-index maximizing action.
    """

    _check_reward(M.space, M.n_actions, r)
    f = np.asarray([worst_case_expectation(M[a], r.row(a))[0] for a in range(M.n_actions)])
    best = lowest_argmax(f)
    return f, float(f[best]), best


def belief_values(Mbar, r):
    """Per-action values f^Mbar(a): expectations for Dist arms, worst cases otherwise."""
    _check_reward(Mbar.space, Mbar.n_actions, r)
    values = []
    for a, arm in enumerate(Mbar.arms):
        if isinstance(arm, Dist):
            values.append(arm.expect(r.row(a)))
        else:
            values.append(worst_case_expectation(arm, r.row(a))[0])
    return np.asarray(values)


def reduce_belief(Mbar, r):
    """
    Probabilistic belief consisting of the worst-case witnesses of each arm.

    Inputs:
        Mbar - Belief (or Model) with imprecise arms.
        r - RewardFn.
    Outputs:
        belief - Belief with one Dist per action.
    """

    arms = Mbar.arms if isinstance(Mbar, Belief) else Mbar.beliefs
    reduced = []
    for a, arm in enumerate(arms):
        if isinstance(arm, Dist):
            reduced.append(arm)
        else:
            reduced.append(worst_case_expectation(arm, r.row(a))[1])
    return Belief(reduced)


def loss_table(Mbar, H, loss=None):
    """Array of shape (|H|, n_actions) with loss(Mbar, M, a)."""
    loss = loss or LossFn()
    return np.asarray([[loss(Mbar, M, a) for a in range(M.n_actions)] for M in H])


def offset_dec_from_tables(maxf, fbar, L, gamma, tie_break=True):
    """
    Offset DEC from precomputed tables.

    min over p of max over M of maxf[M] - p . (fbar + gamma * L[M]), solved as an LP
    in (p, t). With tie_break, a second LP picks the lowest-index minimizer among
    optimal p.

    Inputs:
        maxf - Array (n_models,) of model optimal values.
        fbar - Array (n_actions,) of belief values.
        L - Array (n_models, n_actions) of losses.
        gamma - Non-negative offset weight.
        tie_break - Run the lexicographic second stage. (Default: True)
    Outputs:
        value - The coefficient.
        p - Minimizing action distribution (numpy array).
    """

    maxf = np.asarray(maxf, dtype=float)
    fbar = np.asarray(fbar, dtype=float)
    L = np.asarray(L, dtype=float).reshape(len(maxf), len(fbar))
    if gamma < 0:
        raise InvalidParameterError('gamma must be non-negative, got {}'.format(gamma))
    n_act = len(fbar)
    if n_act == 1:
        value = float(np.max(maxf - fbar[0] - gamma * L[:, 0]))
        return value, np.ones(1)

    gains = fbar[None, :] + gamma * L
    A_ub = np.hstack([-gains, -np.ones((len(maxf), 1))])
    b_ub = -maxf
    A_eq = np.concatenate([np.ones(n_act), [0.0]])[None, :]
    bounds = [(0, None)] * n_act + [(None, None)]
    c = np.zeros(n_act + 1)
    c[-1] = 1.0
    x, value = solve_lp(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds)

    if tie_break:
        c2 = np.concatenate([np.arange(n_act, dtype=float), [0.0]])
        bounds[-1] = (None, value + 1e-10 * (1.0 + abs(value)))
        x, _ = solve_lp(c2, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds)
    p = normalize(x[:n_act])
    return float(np.max(maxf - gains @ p)), p


def _tables(H, Mbar, loss, r):
    maxf = np.asarray([model_values(M, r)[1] for M in H])
    fbar = belief_values(Mbar, r)
    L = loss_table(Mbar, H, loss)
    return maxf, fbar, L


def offset_dec(H, Mbar, gamma, loss=None, r=None):
    """
    Offset decision-estimation coefficient of class H at belief Mbar.

    Outputs:
        value - The coefficient.
        p - Dist over actions attaining it.
    """

    maxf, fbar, L = _tables(H, Mbar, loss, r)
    value, p = offset_dec_from_tables(maxf, fbar, L, gamma)
    return value, _action_dist(r, p)


def _action_dist(r, p):
    return Dist(OutcomeSpace(tuple('a:{}'.format(a) for a in r.actions)), p)


def fuzzy_dec_from_tables(maxf, fbar, L, eps, bracket=GAMMA_BRACKET, n_grid=GAMMA_GRID,
                          rtol=GAMMA_RTOL):
    """
    Fuzzy DEC: min over gamma >= 0 of max(offset_dec(gamma), 0) + gamma * eps^2.

    The objective need not be unimodal in gamma, so gamma = 0 and a log-spaced grid
    over the bracket are evaluated first and the best grid point is refined by
    golden-section search in log(gamma). Ties prefer the smaller gamma.

    Inputs:
        maxf, fbar, L - Tables as in offset_dec_from_tables.
        eps - Non-negative radius.
        bracket - Positive (low, high) gamma range. (Default: GAMMA_BRACKET)
        n_grid - Number of grid points. (Default: GAMMA_GRID)
        rtol - Relative tolerance of the refinement. (Default: GAMMA_RTOL)
    Outputs:
        value - The coefficient.
        p - Offset minimizer at gamma_star.
        gamma_star - Minimizing gamma.
    """

    if eps < 0:
        raise InvalidParameterError('eps must be non-negative, got {}'.format(eps))
    eps_sq = float(eps) ** 2

    def phi(gamma):
        return max(offset_dec_from_tables(maxf, fbar, L, gamma, tie_break=False)[0], 0.0) + gamma * eps_sq

    grid = np.concatenate([[0.0], np.logspace(np.log10(bracket[0]), np.log10(bracket[1]), n_grid)])
    vals = np.asarray([phi(g) for g in grid])
    i = lowest_argmin(vals)
    best_gamma, best_value = float(grid[i]), float(vals[i])

    if 0 < i < len(grid) - 1:
        lo = np.log(grid[i - 1]) if i > 1 else np.log(grid[1]) - np.log(grid[2] / grid[1])
        try:
            res = minimize_scalar(lambda s: phi(np.exp(s)), bracket=(lo, np.log(grid[i]), np.log(grid[i + 1])),
                                  method='golden', tol=rtol)
            if res.fun < best_value - 1e-12:
                best_gamma, best_value = float(np.exp(res.x)), float(res.fun)
        except ValueError:
            # flat around the grid minimum; the grid point stands
            pass

    _, p = offset_dec_from_tables(maxf, fbar, L, best_gamma)
    logger.debug('fuzzy_dec: value %.6g at gamma %.4g', best_value, best_gamma)
    return best_value, p, best_gamma


def fuzzy_dec(H, Mbar, eps, loss=None, r=None, **kwargs):
    """
    Fuzzy decision-estimation coefficient of class H at belief Mbar.

    Outputs:
        value - The coefficient.
        p - Dist over actions (offset minimizer at gamma_star).
        gamma_star - Minimizing gamma.
    """

    maxf, fbar, L = _tables(H, Mbar, loss, r)
    value, p, gamma = fuzzy_dec_from_tables(maxf, fbar, L, eps, **kwargs)
    return value, _action_dist(r, p), gamma


def fuzzy_dec_lower_bound(H, eps, r, rng, n_samples=50, loss=None):
    """
    Sampled lower bound on the worst-case fuzzy DEC over all beliefs.

    Candidates are uniform Dirichlet beliefs plus the reduced beliefs of the class
    members. The result is a lower bound, never the supremum.

    Outputs:
        value - Largest fuzzy DEC among candidates.
        belief - The candidate attaining it.
    """

    space = H.space
    candidates = [reduce_belief(M, r) for M in H]
    for _ in range(n_samples):
        draws = random_simplex(space.size, rng, size=H.n_actions)
        candidates.append(Belief([Dist.from_weights(space, d) for d in draws]))

    best_value, best_belief = -np.inf, None
    for belief in candidates:
        value = fuzzy_dec(H, belief, eps, loss=loss, r=r)[0]
        if value > best_value:
            best_value, best_belief = value, belief
    return float(best_value), best_belief
