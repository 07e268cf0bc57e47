"""
Online robust estimation by prediction market.

Every hypothesis is a bettor; together with a pessimistic bettor and a
uniform bettor they trade on the next outcome. The market odds (the estimate)
minimize the wealth-weighted divergence to the bettors' beliefs, and each
bettor's wealth is multiplied by its bet after the outcome is revealed. At the
exact optimum the wealth-weighted bets sum to one, so total wealth is
conserved.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .belief_utils import Fattened, Singleton, minimize_mixed_distance
from .dec_utils import Belief, Model, ModelClass
from .error_utils import (DimensionError, InvalidParameterError, MarketDegeneracyError,
                          SolverQualityError)
from .prob_utils import Dist, as_probs

__all__ = ['STAR_WARN', 'STAR_FAIL', 'BettorId', 'MarketState', 'EstimationLedger',
           'rue_eps', 'build_prior', 'rue_estimate', 'rue_bets', 'rue_update', 'fatten_model',
           'rue_bounds', 'covering_bound', 'RobustUniversalEstimator', 'CoveringEstimator']

logger = logging.getLogger(__name__)

STAR_WARN = 1e-4
STAR_FAIL = 1e-3
RUE_TOL = 1e-12
RUE_MAX_ITER = 5000


class BettorId(NamedTuple):
    kind: str
    label: Optional[object] = None

    @classmethod
    def model(cls, label):
        return cls('model', label)

    @classmethod
    def pessimism(cls):
        return cls('pessimism')

    @classmethod
    def uniform(cls):
        return cls('uniform')

    def __str__(self):
        return self.kind if self.label is None else '{}:{}'.format(self.kind, self.label)


@dataclass(frozen=True, eq=False)
class MarketState:
    """
    Wealth distribution over the bettors of one market.

    Inputs:
        bettors - Tuple of BettorId; the last two are the pessimism and uniform bettors.
        weights - Array of wealth shares, same order as bettors.
        round - Number of updates applied so far.
        eps_bet - Scale of the pessimistic bettor's bet.
        star - Unnormalized total of the update that produced this state (1 for priors).
    """

    bettors: tuple
    weights: np.ndarray = field(repr=False)
    round: int = 0
    eps_bet: float = 0.5
    star: float = 1.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(self.bettors),):
            raise DimensionError('{} weights for {} bettors'.format(w.shape, len(self.bettors)))
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-6:
            raise InvalidParameterError('market weights must be a distribution, sum is {}'.format(w.sum()))
        w.setflags(write=False)
        object.__setattr__(self, 'weights', w)

    @property
    def model_weights(self):
        return self.weights[:-2]

    @property
    def pessimism_weight(self):
        return float(self.weights[-2])

    @property
    def uniform_weight(self):
        return float(self.weights[-1])

    def weight_of(self, bettor):
        return float(self.weights[self.bettors.index(bettor)])


class EstimationLedger:
    """
    Running inaccuracy and optimism totals of an estimator.

    Inputs:
        labels - Labels of the tracked models.
    """

    def __init__(self, labels):
        self.labels = list(labels)
        self.cumulative_loss = {label: 0.0 for label in self.labels}
        self.cumulative_optimism = 0.0
        self.history = []

    def record(self, losses, optimism):
        """
        Add one round.

        Inputs:
            losses - Dict label -> expected loss of the round (non-negative).
            optimism - Expected optimism of the round (may be negative).
        """
        for label in self.labels:
            value = float(losses[label])
            if value < 0 or not np.isfinite(value):
                raise InvalidParameterError('ledger loss for {!r} is {}'.format(label, value))
            self.cumulative_loss[label] += value
        if not np.isfinite(optimism):
            raise InvalidParameterError('ledger optimism is {}'.format(optimism))
        self.cumulative_optimism += float(optimism)
        self.history.append((dict(self.cumulative_loss), self.cumulative_optimism))

    def max_loss(self):
        return max(self.cumulative_loss.values()) if self.labels else 0.0


def rue_eps(T):
    """Pessimistic bet scale min(1/2, sqrt(ln 2 / T))."""
    if T < 1:
        raise InvalidParameterError('horizon must be positive, got {}'.format(T))
    return min(0.5, float(np.sqrt(np.log(2.0) / T)))


def build_prior(H, eps_prime=0.001, T=None):
    """
    Prior wealth of the market for class H.

    Each model bettor gets 1/(2|H|), the pessimistic bettor 1/2 - eps_prime and the
    uniform bettor eps_prime.

    Inputs:
        H - ModelClass.
        eps_prime - Uniform bettor's share, in (0, 0.01]. (Default: 0.001)
        T - Horizon used for eps_bet. If None, eps_bet = 1/2. (Default: None)
    Outputs:
        zeta - MarketState.
    """

    if not 0.0 < eps_prime < 0.5:
        raise InvalidParameterError('eps_prime must lie in (0, 1/2), got {}'.format(eps_prime))
    if eps_prime > 0.01:
        logger.warning('eps_prime %.4g is above the recommended 0.01', eps_prime)
    n = len(H)
    bettors = tuple(BettorId.model(m.label) for m in H) + (BettorId.pessimism(), BettorId.uniform())
    weights = np.concatenate([np.full(n, 1.0 / (2 * n)), [0.5 - eps_prime, eps_prime]])
    eps_bet = 0.5 if T is None else rue_eps(T)
    return MarketState(bettors, weights, round=0, eps_bet=eps_bet)


def _uniform_belief(space):
    return Singleton(space, np.full(space.size, 1.0 / space.size))


def _check_market(zeta, H):
    if zeta.uniform_weight <= 0:
        raise MarketDegeneracyError('uniform bettor has no wealth')
    if len(zeta.bettors) != len(H) + 2:
        raise DimensionError('market has {} model bettors, class has {} models'.format(
            len(zeta.bettors) - 2, len(H)))


def _estimate_terms(zeta, H, a):
    space = H.space
    terms = [(2.0 * w, M[a]) for w, M in zip(zeta.model_weights, H)]
    terms.append((2.0 * zeta.uniform_weight, _uniform_belief(space)))
    return terms


def rue_estimate(zeta, H, a, r, x0=None, return_result=False):
    """
    Market odds for action a.

    argmin over mu of sum_B zeta(B) 2 D^2(mu -> M_B(a)) + zeta(pess) eps_bet E_mu[r(a, .)],
    where the uniform bettor's belief is the uniform distribution.

    Inputs:
        zeta - MarketState.
        H - ModelClass of the model bettors, in market order.
        a - Action index.
        r - RewardFn.
        x0 - Warm start for the solver. (Default: None)
        return_result - If True, also returns the SolverResult. (Default: False)
    Outputs:
        Mhat - Dist with full support.
    """

    _check_market(zeta, H)
    n = H.space.size
    linear = zeta.pessimism_weight * zeta.eps_bet * r.row(a)
    mu, _, res = minimize_mixed_distance(n, _estimate_terms(zeta, H, a), linear=linear, x0=x0,
                                         max_iter=RUE_MAX_ITER, tol=RUE_TOL, return_result=True)
    if np.min(mu) < 1e-9:
        logger.warning('market estimate for action %s touches the boundary (min %.3g)', a, np.min(mu))
    Mhat = Dist.from_weights(H.space, mu)
    if return_result:
        return Mhat, res
    return Mhat


def rue_bets(zeta, H, Mhat_a, a, o, r):
    """
    Bets of every bettor (market order) after outcome o of action a.

    Model and uniform bettors: sqrt(mu_B(o) / Mhat(o)) + D^2(Mhat -> M_B(a)) with mu_B
    the projection of Mhat onto M_B(a). Pessimism: 1 + eps_bet (E_Mhat r - r(a, o)).
    """

    m = as_probs(Mhat_a, H.space)
    beliefs = [M[a] for M in H] + [_uniform_belief(H.space)]
    bets = np.empty(len(beliefs) + 1)
    for i, belief in enumerate(beliefs):
        mu_b, d2 = belief.project(m)
        bets[i] = np.sqrt(mu_b[o] / m[o]) + d2
    row = r.row(a)
    pess = 1.0 + zeta.eps_bet * (float(m @ row) - row[o])
    # market order: models, pessimism, uniform
    return np.concatenate([bets[:-1], [pess], bets[-1:]])


def rue_update(zeta, H, Mhat_a, a, o, r, return_bets=False):
    """
    Apply the outcome o of action a to the market.

    Outputs:
        zeta - New MarketState (its star field holds the unnormalized total).
        bets - Only if return_bets; the per-bettor bets.
    Raises SolverQualityError when the total deviates from one by more than STAR_FAIL.
    """

    _check_market(zeta, H)
    bets = rue_bets(zeta, H, Mhat_a, a, o, r)
    if np.any(bets < 0):
        raise SolverQualityError('negative bet {}'.format(bets.min()))
    raw = zeta.weights * bets
    star = float(raw.sum())
    drift = abs(star - 1.0)
    if drift > STAR_FAIL:
        raise SolverQualityError('market total {:.6g} deviates from 1; the estimate is not optimal'.format(star))
    if drift > STAR_WARN:
        logger.warning('market total %.8f drifts from 1 at round %d', star, zeta.round + 1)
    new = replace(zeta, weights=raw / star, round=zeta.round + 1, star=star)
    if return_bets:
        return new, bets
    return new


def fatten_model(N, eps):
    """
    Model a -> Fattened(N(a), eps): every distribution within Hellinger distance eps
    of N(a).
    """

    if not 0.0 <= eps <= 1.0:
        raise InvalidParameterError('fattening radius must lie in [0, 1], got {}'.format(eps))
    return Model(N.label, [Fattened(b, eps) for b in N.beliefs])


def rue_bounds(n_models, T, delta):
    """
    Finite-horizon inaccuracy and optimism bounds of the market estimator.

    Outputs:
        beta - ln(2 n_models / delta).
        alpha - sqrt(T) (2 sqrt(ln 2) + sqrt(2 ln(1/delta))).
    """

    beta = float(np.log(2.0 * n_models / delta))
    alpha = float(np.sqrt(T) * (2.0 * np.sqrt(np.log(2.0)) + np.sqrt(2.0 * np.log(1.0 / delta))))
    return beta, alpha


def covering_bound(cover_size, T, delta, eps):
    """Inaccuracy bound 2 ln(2 cover_size / delta) + 8 T eps^2 of the covering estimator."""
    return float(2.0 * np.log(2.0 * cover_size / delta) + 8.0 * T * eps ** 2)


class RobustUniversalEstimator:
    """
    Online estimator over a finite model class.

    Inputs:
        H - ModelClass of bettor hypotheses.
        r - RewardFn.
        T - Horizon (sets the pessimistic bet scale).
        eps_prime - Uniform bettor prior share. (Default: 0.001)
    """

    name = 'rue'

    def __init__(self, H, r, T, eps_prime=0.001):
        self.H = H
        self.r = r
        self.T = T
        self.zeta = build_prior(H, eps_prime, T=T)
        self.prior = self.zeta
        self.log_bets = np.zeros(len(self.zeta.bettors))
        self.log_stars = 0.0
        self.stars = []
        self._estimates = None
        self._warm = {}

    def estimate(self):
        """Belief with one full-support Dist per action for the current round."""
        if self._estimates is None:
            arms = []
            for a in range(self.r.n_actions):
                Mhat, res = rue_estimate(self.zeta, self.H, a, self.r, x0=self._warm.get(a),
                                         return_result=True)
                self._warm[a] = res.x
                arms.append(Mhat)
            self._estimates = Belief(arms)
        return self._estimates

    def observe(self, a, o):
        """Update the market with outcome index o of action index a."""
        Mhat = self.estimate()[a]
        self.zeta, bets = rue_update(self.zeta, self.H, Mhat, a, o, self.r, return_bets=True)
        with np.errstate(divide='ignore'):
            self.log_bets += np.log(bets)
        self.log_stars += np.log(self.zeta.star)
        self.stars.append(self.zeta.star)
        self._estimates = None
        return self.zeta.star

    def wealth_log_gap(self):
        """
        Difference between both sides of the wealth-log identity
        ln zeta_T(B) - ln zeta_1(B) = sum ln bet(B) - sum ln star, per bettor with
        positive wealth.
        """
        alive = self.zeta.weights > 0
        lhs = np.log(self.zeta.weights[alive]) - np.log(self.prior.weights[alive])
        rhs = self.log_bets[alive] - self.log_stars
        return np.abs(lhs - rhs)

    def beta_bound(self, delta):
        return rue_bounds(len(self.H), self.T, delta)[0]

    def alpha_bound(self, delta):
        return rue_bounds(len(self.H), self.T, delta)[1]


class CoveringEstimator(RobustUniversalEstimator):
    """
    Market estimator over a finite cover whose models are fattened by radius eps.

    Inputs:
        cover - ModelClass of cover models (unfattened).
        radius - Hellinger fattening radius.
        r, T, eps_prime - As in RobustUniversalEstimator.
    """

    name = 'covering'

    def __init__(self, cover, radius, r, T, eps_prime=0.001):
        self.cover = cover
        self.radius = float(radius)
        fattened = ModelClass([fatten_model(M, radius) for M in cover])
        super().__init__(fattened, r, T, eps_prime=eps_prime)

    def beta_bound(self, delta):
        return covering_bound(len(self.cover), self.T, delta, self.radius)
