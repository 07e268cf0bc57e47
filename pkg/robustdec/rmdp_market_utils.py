"""
Bettor-market estimator for partial-halfspace RMDPs.

Bettors:
    fragment     one per (cell, grid halfspace); bets on the cell's outcome
    calibration  one per (cell, grid halfspace) at h >= 1; bets on reaching its state
    uniform      one per cell; keeps every estimated cell at full support
    pessimism    a single bettor that bets against optimistic reward estimates

For a fixed policy the estimated MDP is built layer by layer from the last one
down: each cell minimizes the wealth-weighted mixture of the bettors' losses,
where fragment and uniform losses are 2 D^2(mu -> Psi_B) and calibration and
pessimism losses are linear in mu once the deeper layers are known.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .belief_utils import Halfspace, Singleton, minimize_mixed_distance
from .error_utils import (CapacityError, DimensionError, InvalidParameterError,
                          InvariantViolationError, MarketDegeneracyError)
from .numpy_utils import make_rng
from .prob_utils import OutcomeSpace, hellinger_sq
from .rmdp_utils import (GRID_GUARD, TERMINAL_SPACE, Trajectory, convert_reward,
                         modified_loss_product, robust_optimal_policy, robust_value, traj_dist)

__all__ = ['FRAGMENT', 'CALIBRATION', 'UNIFORM', 'PESSIMISM', 'MAX_BETTORS', 'BettorIndex',
           'RmdpMarketState', 'InducedMDP', 'grid_count', 'bettor_counts', 'build_bettor_index',
           'induce_mdp', 'market_update', 'pessimism_eps', 'rmdp_market_bounds', 'rmdp_reference_bound',
           'RmdpMarketEstimator', 'RmdpProblem']

logger = logging.getLogger(__name__)

FRAGMENT, CALIBRATION, UNIFORM, PESSIMISM = range(4)
KIND_NAMES = ('fragment', 'calibration', 'uniform', 'pessimism')
MAX_BETTORS = 2_000_000
INDUCE_TOL = 1e-8
INDUCE_MAX_ITER = 3000
STAR_WARN = 1e-4


def grid_count(eps):
    """Number of grid levels floor(1/eps) + 1."""
    if eps <= 0:
        raise InvalidParameterError('grid step must be positive, got {}'.format(eps))
    return int(np.floor(1.0 / eps + GRID_GUARD)) + 1


def bettor_counts(S, A, H, eps_S, eps_01):
    """Sizes of the hypothesis grids and of each bettor family."""
    n_mid = grid_count(eps_S) ** S * grid_count(eps_01)
    n_end = grid_count(eps_01)
    inner = (H - 1) * S * A
    counts = {
        'mid': n_mid,
        'end': n_end,
        'fragment': n_mid + inner * n_mid + S * A * n_end,
        'calibration': inner * n_mid + S * A * n_end,
        'uniform': 1 + inner + S * A,
        'pessimism': 1,
    }
    counts['total'] = counts['fragment'] + counts['calibration'] + counts['uniform'] + 1
    return counts


class BettorIndex:
    """
    Enumeration of all bettors of the market.

    Order: fragments (h = 0, then h = 1..H-1 by (s, a, set), then h = H), calibrations
    (h = 1..H-1, then h = H), uniforms (h = 0, 1..H-1, H), pessimism last.

    Inputs:
        S, A, H - Sizes (H >= 1).
        eps_S, eps_01 - Grid steps for the per-state values and the threshold.
        max_bettors - Capacity limit. (Default: MAX_BETTORS)
    """

    def __init__(self, S, A, H, eps_S, eps_01, max_bettors=MAX_BETTORS):
        if H < 1 or S < 1 or A < 1:
            raise InvalidParameterError('the market needs H >= 1, S >= 1, A >= 1; got {}, {}, {}'.format(H, S, A))
        if not (0 < eps_S <= 1 and 0 < eps_01 <= 1):
            raise InvalidParameterError('grid steps must lie in (0, 1], got {}, {}'.format(eps_S, eps_01))
        self.S, self.A, self.H = int(S), int(A), int(H)
        self.eps_S, self.eps_01 = float(eps_S), float(eps_01)
        self.counts = bettor_counts(S, A, H, eps_S, eps_01)
        if self.counts['total'] > max_bettors:
            raise CapacityError('market would need {} bettors (limit {}): {}'.format(
                self.counts['total'], max_bettors, self.counts), counts=self.counts)

        self.mid_space = OutcomeSpace.reward_state(S)
        self.mid_sets, self.mid_params = self._mid_sets()
        self.end_sets, self.end_params = self._end_sets()
        self.mid_vacuous = np.array([c <= f.min() + GRID_GUARD for f, c in self.mid_params])
        self.end_vacuous = np.array([c <= GRID_GUARD for c in self.end_params])
        self.uniform_mid = Singleton(self.mid_space, np.full(2 * S, 1.0 / (2 * S)))
        self.uniform_end = Singleton(TERMINAL_SPACE, np.full(2, 0.5))

        rows = []
        self._add_family(rows, FRAGMENT, include_first=True)
        self._add_family(rows, CALIBRATION, include_first=False)
        rows.append((UNIFORM, 0, 0, 0, -1))
        for h in range(1, H + 1):
            rows.extend((UNIFORM, h, s, a, -1) for s in range(S) for a in range(A))
        rows.append((PESSIMISM, -1, -1, -1, -1))
        table = np.asarray(rows, dtype=int)
        self.kind, self.h, self.s, self.a, self.psi = table.T
        for arr in (self.kind, self.h, self.s, self.a, self.psi):
            arr.setflags(write=False)
        self.pessimism = len(rows) - 1

        self.by_cell = {}
        frag_idx = np.flatnonzero(self.kind == FRAGMENT)
        unif_idx = np.flatnonzero(self.kind == UNIFORM)
        for i in unif_idx:
            key = (int(self.h[i]), int(self.s[i]), int(self.a[i]))
            self.by_cell[key] = (np.zeros(0, dtype=int), int(i))
        cells = {}
        for i in frag_idx:
            cells.setdefault((int(self.h[i]), int(self.s[i]), int(self.a[i])), []).append(i)
        for key, ids in cells.items():
            self.by_cell[key] = (np.asarray(ids, dtype=int), self.by_cell[key][1])

        self.cal_ids = np.flatnonzero(self.kind == CALIBRATION)
        self.cal_layers = {h: np.flatnonzero(self.h[self.cal_ids] == h) for h in range(1, H + 1)}
        self.uniform_ids = unif_idx

    def _mid_sets(self):
        S = self.S
        f_levels = np.clip(1.0 - np.arange(grid_count(self.eps_S)) * self.eps_S, 0.0, 1.0)
        c_levels = np.clip(np.arange(grid_count(self.eps_01)) * self.eps_01, 0.0, 1.0)
        grids = np.stack(np.meshgrid(*([f_levels] * S), indexing='ij'), axis=-1).reshape(-1, S)
        sets, params = [], []
        for f in grids:
            g = np.concatenate([f, f + 1.0])
            for c in c_levels:
                sets.append(Halfspace(self.mid_space, g, c))
                params.append((f.copy(), float(c)))
        return tuple(sets), params

    def _end_sets(self):
        c_levels = np.clip(np.arange(grid_count(self.eps_01)) * self.eps_01, 0.0, 1.0)
        sets = tuple(Halfspace(TERMINAL_SPACE, [0.0, 1.0], c) for c in c_levels)
        return sets, [float(c) for c in c_levels]

    def _add_family(self, rows, kind, include_first):
        S, A, H = self.S, self.A, self.H
        n_mid, n_end = len(self.mid_sets), len(self.end_sets)
        if include_first:
            rows.extend((kind, 0, 0, 0, k) for k in range(n_mid))
        for h in range(1, H):
            rows.extend((kind, h, s, a, k) for s in range(S) for a in range(A) for k in range(n_mid))
        rows.extend((kind, H, s, a, k) for s in range(S) for a in range(A) for k in range(n_end))

    @property
    def size(self):
        return len(self.kind)

    def sets(self, h):
        return self.end_sets if h == self.H else self.mid_sets

    def vacuous(self, h):
        return self.end_vacuous if h == self.H else self.mid_vacuous

    def uniform_belief(self, h):
        return self.uniform_end if h == self.H else self.uniform_mid

    def belief_of(self, i):
        """Psi_B of a fragment, calibration or uniform bettor."""
        kind, h = self.kind[i], self.h[i]
        if kind == UNIFORM:
            return self.uniform_belief(h)
        if kind == PESSIMISM:
            raise InvalidParameterError('the pessimism bettor carries no belief')
        return self.sets(h)[self.psi[i]]

    def describe(self, i):
        kind = KIND_NAMES[self.kind[i]]
        if self.kind[i] == PESSIMISM:
            return kind
        return '{}(h={}, s={}, a={}, set={})'.format(kind, self.h[i], self.s[i], self.a[i], self.psi[i])

    def find(self, kind, h, s, a, psi=-1):
        hits = np.flatnonzero((self.kind == kind) & (self.h == h) & (self.s == s) & (self.a == a)
                              & (self.psi == psi))
        if len(hits) != 1:
            raise InvalidParameterError('no unique bettor {}'.format((KIND_NAMES[kind], h, s, a, psi)))
        return int(hits[0])


def pessimism_eps(T, H):
    """sqrt(1 / (T (H+1)^2)); 1/(H+1) without a horizon."""
    if T is None:
        return 1.0 / (H + 1)
    if T < 1:
        raise InvalidParameterError('horizon must be positive, got {}'.format(T))
    return float(np.sqrt(1.0 / (T * (H + 1) ** 2)))


@dataclass(frozen=True, eq=False)
class RmdpMarketState:
    """
    Wealth over the bettors of a BettorIndex.

    Inputs:
        index - BettorIndex.
        weights - Wealth shares in index order.
        eps_prime - Prior share of the uniform bettors.
        eps_pess - Scale of the pessimism bettor.
        round - Updates applied so far.
        star - Unnormalized total of the update that produced this state.
    """

    index: BettorIndex = field(repr=False)
    weights: np.ndarray = field(repr=False)
    eps_prime: float = 0.001
    eps_pess: float = 0.5
    round: int = 0
    star: float = 1.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.index.size,):
            raise DimensionError('{} weights for {} bettors'.format(w.shape, self.index.size))
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-6:
            raise InvalidParameterError('market weights must be a distribution, sum is {}'.format(w.sum()))
        w.setflags(write=False)
        object.__setattr__(self, 'weights', w)

    @property
    def uniform_weight(self):
        return float(self.weights[self.index.uniform_ids].sum())

    @property
    def pessimism_weight(self):
        return float(self.weights[self.index.pessimism])

    def family_weight(self, kind):
        return float(self.weights[self.index.kind == kind].sum())


def build_bettor_index(S, A, H, eps_S, eps_01, eps_prime=0.001, T=None, max_bettors=MAX_BETTORS):
    """
    Enumerate the bettors and build the prior.

    Fragment and calibration bettors get 1/(2(|frag| + |cal|)) each, the pessimism
    bettor 1/2 - eps_prime and the uniform bettors eps_prime / |unif| each.

    Inputs:
        S, A, H - Sizes (H >= 1).
        eps_S, eps_01 - Grid steps.
        eps_prime - Total uniform share, in (0, 0.01]. (Default: 0.001)
        T - Horizon for the pessimism scale. (Default: None)
        max_bettors - Capacity limit. (Default: MAX_BETTORS)
    Outputs:
        index - BettorIndex.
        zeta - Prior RmdpMarketState.
    """

    if not 0.0 < eps_prime <= 0.01:
        raise InvalidParameterError('eps_prime must lie in (0, 0.01], got {}'.format(eps_prime))
    index = BettorIndex(S, A, H, eps_S, eps_01, max_bettors=max_bettors)
    c = index.counts
    weights = np.empty(index.size)
    informed = (index.kind == FRAGMENT) | (index.kind == CALIBRATION)
    weights[informed] = 1.0 / (2 * (c['fragment'] + c['calibration']))
    weights[index.kind == UNIFORM] = eps_prime / c['uniform']
    weights[index.pessimism] = 0.5 - eps_prime
    logger.info('RMDP market: %d bettors (%d fragment, %d calibration, %d uniform)',
                index.size, c['fragment'], c['calibration'], c['uniform'])
    return index, RmdpMarketState(index, weights, eps_prime=eps_prime, eps_pess=pessimism_eps(T, H))


@dataclass(frozen=True, eq=False)
class InducedMDP:
    """
    Estimated MDP for one policy.

    Inputs:
        H, S, A - Sizes.
        cells - Dict (h, s, a) -> full-support probability vector.
        q_reward - Array (H+1, S, A) of expected reward-to-go from each cell.
        v_reward - Array (H+2, S) of expected reward-to-go under the policy.
        cal_x - X^B of every calibration bettor (order of BettorIndex.cal_ids).
    """

    H: int
    S: int
    A: int
    cells: dict = field(repr=False)
    q_reward: np.ndarray = field(repr=False)
    v_reward: np.ndarray = field(repr=False)
    cal_x: np.ndarray = field(repr=False)

    @property
    def value(self):
        """Expected total reward of the estimate."""
        return float(self.v_reward[0, 0])

    def cell(self, h, s, a):
        return self.cells[(h, s, a)]

    def traj_dist(self, pi):
        return traj_dist(self.cells, pi, self.H, self.S)

    def min_probability(self):
        return float(min(np.min(c) for c in self.cells.values()))


def _check_state(zeta):
    if zeta.uniform_weight <= 0 or np.any(zeta.weights[zeta.index.uniform_ids] <= 0):
        raise MarketDegeneracyError('a uniform bettor has no wealth')


def _solve_layer(zeta, h, v_next, c_next, warm, tail, max_iter, tol):
    index = zeta.index
    H, S, A = index.H, index.S, index.A
    w = zeta.weights
    pess = w[index.pessimism] * zeta.eps_pess
    if h == H:
        n = 2
        linear = pess * np.array([0.0, 1.0])
    else:
        n = 2 * S
        linear = np.concatenate([c_next, c_next]) + pess * np.concatenate([v_next, v_next + 1.0])

    sets, vacuous = index.sets(h), index.vacuous(h)
    states = range(1) if h == 0 else range(S)
    actions = range(1) if h == 0 else range(A)
    cells = {}
    q_rew = np.zeros((S, A))
    q_cal = np.zeros((S, A))
    for s in states:
        for a in actions:
            frag, unif = index.by_cell[(h, s, a)]
            terms = [(2.0 * w[i], sets[index.psi[i]]) for i in frag
                     if w[i] > 0 and not vacuous[index.psi[i]]]
            terms.append((2.0 * w[unif], index.uniform_belief(h)))
            key = (h, s, a, tail)
            mu, _, res = minimize_mixed_distance(n, terms, linear=linear, x0=warm.get(key),
                                                 max_iter=max_iter, tol=tol, return_result=True)
            warm[key] = res.x
            if np.min(mu) <= 0:
                raise MarketDegeneracyError('estimated cell {} lost full support'.format((h, s, a)))
            cells[(h, s, a)] = mu
            if h == H:
                q_rew[s, a] = mu[1]
            else:
                nxt = mu[:S] + mu[S:]
                q_rew[s, a] = mu[S:].sum() + nxt @ v_next
                q_cal[s, a] = nxt @ c_next

    d2_cal = np.zeros(0)
    if h >= 1:
        pos = index.cal_layers[h]
        ids = index.cal_ids[pos]
        d2_cal = np.zeros(len(ids))
        for j, i in enumerate(ids):
            if not vacuous[index.psi[i]]:
                d2_cal[j] = sets[index.psi[i]].project(cells[(h, index.s[i], index.a[i])])[1]
    return cells, q_rew, q_cal, d2_cal


def induce_mdp(zeta, pi, cache=None, warm=None, max_iter=INDUCE_MAX_ITER, tol=INDUCE_TOL):
    """
    Estimated MDP M_{zeta, pi} by downward induction.

    Inputs:
        zeta - RmdpMarketState.
        pi - Policy.
        cache - Dict shared across policies of one round; layers are reused by
            policies that agree on all deeper layers. (Default: None)
        warm - Dict of solver warm starts, kept across rounds. (Default: None)
        max_iter, tol - Solver budget per cell.
    Outputs:
        induced - InducedMDP.
    Raises MarketDegeneracyError when a uniform bettor has no wealth.
    """

    _check_state(zeta)
    index = zeta.index
    H, S, A = index.H, index.S, index.A
    if (pi.H, pi.S, pi.A) != (H, S, A):
        raise DimensionError('policy shape {} does not match the market {}'.format((pi.H, pi.S, pi.A), (H, S, A)))
    cache = {} if cache is None else cache
    warm = {} if warm is None else warm

    cells = {}
    q_reward = np.zeros((H + 1, S, A))
    v_reward = np.zeros((H + 2, S))
    potential = np.zeros((H + 2, S))
    cal_x = np.zeros(len(index.cal_ids))
    for h in range(H, -1, -1):
        tail = pi.tail_key(h)
        key = (zeta.round, h, tail)
        if key not in cache:
            cache[key] = _solve_layer(zeta, h, v_reward[h + 1], potential[h + 1], warm, tail, max_iter, tol)
        layer_cells, q_rew, q_cal, d2_cal = cache[key]
        cells.update(layer_cells)
        q_reward[h] = q_rew
        if h == 0:
            v_reward[0, 0] = q_rew[0, 0]
            continue
        probs = pi.probs[h - 1]
        v_reward[h] = (probs * q_rew).sum(axis=1)
        pos = index.cal_layers[h]
        ids = index.cal_ids[pos]
        x = probs[index.s[ids], index.a[ids]] * d2_cal
        cal_x[pos] = x
        pull = np.zeros(S)
        np.add.at(pull, index.s[ids], zeta.weights[ids] * x / 4.0)
        potential[h] = pull + (probs * q_cal).sum(axis=1)
    return InducedMDP(H, S, A, cells, q_reward, v_reward, cal_x)


def _visits(traj, S, H):
    """(h, s_h, a_h, outcome index) for every layer of a trajectory."""
    out = []
    for h in range(H + 1):
        if h == 0:
            s, a, r = 0, 0, int(traj.r0)
        else:
            s, a, r = traj.states[h - 1], traj.actions[h - 1], int(traj.rewards[h - 1])
        o = r if h == H else r * S + traj.states[h]
        out.append((h, int(s), int(a), o))
    return out


def _reach_q(induced, pi, h_B, s_B):
    """Q[k][s, a] = P(s_{h_B} = s_B | s_k = s, a_k = a) under the estimate, k = 0..h_B."""
    S, A = induced.S, induced.A
    Q = [None] * (h_B + 1)
    Q[h_B] = np.repeat((np.arange(S) == s_B).astype(float)[:, None], A, axis=1)
    v = Q[h_B][:, 0]
    for k in range(h_B - 1, -1, -1):
        q = np.zeros((S, A))
        for s in (range(1) if k == 0 else range(S)):
            for a in (range(1) if k == 0 else range(A)):
                mu = induced.cells[(k, s, a)]
                q[s, a] = (mu[:S] + mu[S:]) @ v
        Q[k] = q
        if k > 0:
            v = (pi.probs[k - 1] * q).sum(axis=1)
    return Q


def market_update(zeta, induced, pi, traj, return_bets=False):
    """
    Settle all bets on one episode.

    Inputs:
        zeta - RmdpMarketState the estimate was built from.
        induced - induce_mdp(zeta, pi).
        pi - Policy played.
        traj - Trajectory with bit rewards.
        return_bets - If True, also return the per-bettor bets. (Default: False)
    Outputs:
        zeta - New state; its star field holds the unnormalized total.
        star - The unnormalized total.
        bets - Only if return_bets.
    Raises InvariantViolationError on a negative bet.
    """

    _check_state(zeta)
    index = zeta.index
    H, S = index.H, index.S
    if traj.H != H:
        raise DimensionError('trajectory has {} layers, market has {}'.format(traj.H, H))
    if not traj.is_binary:
        raise InvalidParameterError('trajectory rewards must be bits; convert them first')

    bets = np.ones(index.size)
    visits = _visits(traj, S, H)
    for h, s, a, o in visits:
        M = induced.cells[(h, s, a)]
        frag, unif = index.by_cell[(h, s, a)]
        sets, vacuous = index.sets(h), index.vacuous(h)
        for i in frag:
            if vacuous[index.psi[i]]:
                continue
            mu_b, d2 = sets[index.psi[i]].project(M)
            bets[i] = np.sqrt(mu_b[o] / M[o]) + d2
        u = np.full(len(M), 1.0 / len(M))
        bets[unif] = np.sqrt(u[o] / M[o]) + hellinger_sq(M, u)

    for h_B in range(1, H + 1):
        pos = index.cal_layers[h_B]
        ids = index.cal_ids[pos]
        for s_B in range(S):
            sel = index.s[ids] == s_B
            if not np.any(sel):
                continue
            Q = _reach_q(induced, pi, h_B, s_B)
            step = 0.0
            for k in range(h_B):
                _, s, a, _ = visits[k]
                _, s2, a2, _ = visits[k + 1]
                step += Q[k][s, a] - Q[k + 1][s2, a2]
            bets[ids[sel]] += induced.cal_x[pos[sel]] / 4.0 * step

    step = 0.0
    for h, s, a, o in visits:
        r = o if h == H else o // S
        after = 0.0
        if h < H:
            _, s2, a2, _ = visits[h + 1]
            after = induced.q_reward[h + 1][s2, a2]
        step += induced.q_reward[h][s, a] - r - after
    bets[index.pessimism] = 1.0 + zeta.eps_pess * step

    if np.any(bets < -1e-12):
        i = int(np.argmin(bets))
        raise InvariantViolationError('negative bet {:.6g} for {}'.format(bets[i], index.describe(i)),
                                      {'bettor': index.describe(i), 'bet': float(bets[i]), 'round': zeta.round})
    bets = np.maximum(bets, 0.0)
    raw = zeta.weights * bets
    star = float(raw.sum())
    if pi.is_deterministic and abs(star - 1.0) > STAR_WARN:
        logger.warning('RMDP market total %.8f drifts from 1 at round %d', star, zeta.round + 1)
    new = replace(zeta, weights=raw / star, round=zeta.round + 1, star=star)
    _check_state(new)
    if return_bets:
        return new, star, bets
    return new, star


def rmdp_market_bounds(S, A, H, T, delta, eps_S, eps_01):
    """
    Inaccuracy and optimism bounds of the market estimator.

    Outputs:
        beta - (16HS+2)(ln(1/eps_01 + 1) + S ln(1/eps_S + 1)
            + ln(16(HSA+1)(HS+1)/delta^2)) + 2T(H+1)(eps_S + eps_01).
        alpha - (H+1) sqrt(T) (ln(4/delta) + 1 + sqrt(2 ln(2/delta))) + 4.
    """

    HS = H * S
    beta = (16 * HS + 2) * (np.log(1.0 / eps_01 + 1.0) + S * np.log(1.0 / eps_S + 1.0)
                            + np.log(16.0 * (HS * A + 1) * (HS + 1) / delta ** 2)) \
        + 2.0 * T * (H + 1) * (eps_S + eps_01)
    alpha = (H + 1) * np.sqrt(T) * (np.log(4.0 / delta) + 1.0 + np.sqrt(2.0 * np.log(2.0 / delta))) + 4.0
    return float(beta), float(alpha)


def rmdp_reference_bound(H, S, A, eps):
    """Reference DEC scale 2 sqrt(2(HSA+1)) eps."""
    return float(2.0 * np.sqrt(2.0 * (H * S * A + 1)) * eps)


class RmdpMarketEstimator:
    """
    Online estimator for episodic runs whose actions are policies.

    Inputs:
        S, A, H - Sizes.
        T - Number of episodes.
        eps_S, eps_01 - Grid steps.
        policies - Sequence of Policy (the action set).
        eps_prime - Uniform prior share. (Default: 0.001)
        rng - Generator for Bernoulli reward conversion. (Default: seed 0 'convert' stream)
        max_bettors - Capacity limit. (Default: MAX_BETTORS)
    """

    name = 'rmdp-market'

    def __init__(self, S, A, H, T, eps_S, eps_01, policies, eps_prime=0.001, rng=None,
                 max_bettors=MAX_BETTORS):
        self.S, self.A, self.H, self.T = S, A, H, T
        self.eps_S, self.eps_01 = eps_S, eps_01
        self.index, self.zeta = build_bettor_index(S, A, H, eps_S, eps_01, eps_prime=eps_prime, T=T,
                                                   max_bettors=max_bettors)
        self.policies = list(policies)
        self.rng = rng if rng is not None else make_rng(0, 'convert')
        self.stars = []
        self._cache = {}
        self._warm = {}
        self._estimates = None

    def induced(self, i):
        return induce_mdp(self.zeta, self.policies[i], cache=self._cache, warm=self._warm)

    def estimate(self):
        """InducedMDP of every policy for the current round."""
        if self._estimates is None:
            self._estimates = [self.induced(i) for i in range(len(self.policies))]
        return self._estimates

    def convert(self, traj):
        """Trajectory with every reward rounded to a bit."""
        if traj.is_binary:
            return traj
        bits = [convert_reward(r, self.rng) for r in traj.all_rewards]
        return Trajectory(r0=bits[0], states=traj.states, actions=traj.actions, rewards=tuple(bits[1:]),
                          violations=traj.violations)

    def observe(self, i, traj):
        """Settle the market on the episode traj played with policy index i."""
        induced = self.estimate()[i]
        self.zeta, star = market_update(self.zeta, induced, self.policies[i], self.convert(traj))
        self.stars.append(star)
        self._estimates = None
        self._cache = {}
        return star

    def beta_bound(self, delta):
        return rmdp_market_bounds(self.S, self.A, self.H, self.T, delta, self.eps_S, self.eps_01)[0]

    def alpha_bound(self, delta):
        return rmdp_market_bounds(self.S, self.A, self.H, self.T, delta, self.eps_S, self.eps_01)[1]


class RmdpProblem:
    """
    Tables for E2D over a finite set of policies.

    Inputs:
        hypotheses - Sequence of (label, RMDPKernel).
        policies - Sequence of Policy (the actions).
    """

    def __init__(self, hypotheses, policies):
        self.hypotheses = list(hypotheses)
        self.policies = list(policies)
        self.labels = [label for label, _ in self.hypotheses]
        if len(set(self.labels)) != len(self.labels):
            raise InvalidParameterError('hypothesis labels must be unique')
        maxf = []
        for label, kernel in self.hypotheses:
            V, one_bounded = robust_value(kernel, robust_optimal_policy(kernel))
            if not one_bounded:
                logger.warning('hypothesis %s is not 1-bounded on the checked policies', label)
            maxf.append(V[0, 0])
        self.maxf = np.asarray(maxf)

    @property
    def n_actions(self):
        return len(self.policies)

    def tables(self, estimate):
        """Estimated values (n_policies,) and modified losses (n_hypotheses, n_policies)."""
        fbar = np.asarray([induced.value for induced in estimate])
        L = np.zeros((len(self.hypotheses), len(self.policies)))
        for j, (_, kernel) in enumerate(self.hypotheses):
            for i, pi in enumerate(self.policies):
                L[j, i] = modified_loss_product(estimate[i].cells, kernel, pi)
        return fbar, L
