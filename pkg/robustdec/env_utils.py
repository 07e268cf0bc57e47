"""
Environments consistent with a robust model.

Nature picks, per round and action, one member of the model's belief. The
choice may depend on the visible history and, when the strategy is declared
with the 'plus-public-estimates' scope, on the learner's current estimate.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .belief_utils import ABS_TOL, worst_case_expectation
from .dec_utils import Model
from .error_utils import ConfigurationError, DimensionError
from .prob_utils import Dist, as_probs

__all__ = ['MODES', 'SCOPES', 'EnvStrategy', 'EnvContext', 'adversary_choose',
           'check_consistency', 'ConsistencyMonitor', 'RobustEnvironment']

logger = logging.getLogger(__name__)

MODES = ('worst-case-stationary', 'random-vertex', 'hellinger-projection', 'scripted')
SCOPES = ('actions-only', 'plus-public-estimates')


@dataclass(frozen=True)
class EnvStrategy:
    """
    How nature picks members of a model's beliefs.

    Inputs:
        mode - One of MODES.
        model - Model the environment is declared consistent with.
        scope - 'actions-only' or 'plus-public-estimates'. (Default: 'actions-only')
        script - For 'scripted': sequence of rounds, each a sequence of per-action
            probability vectors; rounds beyond the script repeat the last one.
    """

    mode: str
    model: Model
    scope: str = 'actions-only'
    script: tuple = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError('unknown environment mode {!r}; expected one of {}'.format(self.mode, MODES))
        if self.scope not in SCOPES:
            raise ConfigurationError('unknown observation scope {!r}'.format(self.scope))
        if self.mode == 'hellinger-projection' and self.scope != 'plus-public-estimates':
            raise ConfigurationError("mode 'hellinger-projection' reads the learner's estimates; "
                                     "declare scope 'plus-public-estimates'")
        if self.mode == 'scripted':
            if not self.script:
                raise ConfigurationError("mode 'scripted' needs a non-empty script")
            script = tuple(tuple(np.asarray(p, dtype=float) for p in rnd) for rnd in self.script)
            for rnd in script:
                if len(rnd) != self.model.n_actions:
                    raise DimensionError('script round has {} actions, model has {}'.format(
                        len(rnd), self.model.n_actions))
            object.__setattr__(self, 'script', script)


@dataclass
class EnvContext:
    """What nature may look at when choosing: round, history and (by scope) the estimate."""

    t: int = 0
    history: list = field(default_factory=list)
    estimate: Optional[Any] = None


def adversary_choose(strategy, a, context, r, rng):
    """
    Member of strategy.model[a] chosen by nature for action a.

    Inputs:
        strategy - EnvStrategy.
        a - Action index.
        context - EnvContext.
        r - RewardFn.
        rng - numpy Generator (used by 'random-vertex').
    Outputs:
        dist - Dist over the outcome space.
    """

    belief = strategy.model[a]
    space = belief.space
    mode = strategy.mode
    if mode == 'worst-case-stationary':
        return worst_case_expectation(belief, r.row(a))[1]
    if mode == 'random-vertex':
        if belief.is_vertex_exposing:
            V = belief.vertices()
            return Dist.from_weights(space, V[rng.integers(len(V))])
        draw = rng.dirichlet(np.ones(space.size))
        return Dist.from_weights(space, belief.project(draw)[0])
    if mode == 'hellinger-projection':
        if strategy.scope != 'plus-public-estimates':
            raise ConfigurationError('hellinger-projection needs public estimates')
        if context.estimate is None:
            raise ConfigurationError('no public estimate available at round {}'.format(context.t))
        target = as_probs(context.estimate[a])
        return Dist.from_weights(space, belief.project(target)[0])
    rnd = strategy.script[min(context.t, len(strategy.script) - 1)]
    return Dist.from_weights(space, rnd[a])


def check_consistency(dist, M, a, tol=ABS_TOL):
    """True when dist is a member of M(a) (linear constraints checked to tol)."""
    return bool(M[a].contains(as_probs(dist), tol=tol))


class ConsistencyMonitor:
    """
    Records emitted distributions that fall outside the declared model.

    Inputs:
        model - The declared model.
    """

    def __init__(self, model, tol=ABS_TOL):
        self.model = model
        self.tol = tol
        self.violations = []

    def check(self, t, a, dist):
        ok = check_consistency(dist, self.model, a, tol=self.tol)
        if not ok:
            self.violations.append((t, a))
            logger.warning('round %d: environment emitted a non-member for action %d', t, a)
        return ok


class RobustEnvironment:
    """
    Environment driving a bandit run.

    Inputs:
        strategy - EnvStrategy.
        r - RewardFn.
        rng - numpy Generator reserved for nature.
        monitor - Optional ConsistencyMonitor. (Default: None)
    """

    def __init__(self, strategy, r, rng, monitor=None):
        self.strategy = strategy
        self.r = r
        self.rng = rng
        self.monitor = monitor

    @property
    def n_actions(self):
        return self.strategy.model.n_actions

    def theta(self, context):
        """Realized per-action distributions for this round."""
        if self.strategy.scope == 'actions-only':
            context = EnvContext(t=context.t, history=context.history, estimate=None)
        dists = [adversary_choose(self.strategy, a, context, self.r, self.rng)
                 for a in range(self.n_actions)]
        if self.monitor is not None:
            for a, d in enumerate(dists):
                self.monitor.check(context.t, a, d)
        return dists

    def values(self, theta):
        return np.asarray([d.expect(self.r.row(a)) for a, d in enumerate(theta)])

    def draw(self, a, theta):
        return int(self.rng.choice(theta[a].space.size, p=theta[a].probs))

    def reward(self, a, outcome):
        return self.r(a, outcome)
