"""
Estimations to Decisions.

Each round the online estimator proposes a belief, the learner plays the
fuzzy-DEC minimizing action distribution against the hypotheses that are
still plausible, and hypotheses whose cumulative expected divergence from the
estimates exceeds the estimator's inaccuracy budget are filtered out.

The loop talks to three collaborators:
    problem    value/loss tables of hypotheses and estimates (BanditProblem here,
               RmdpProblem for episodic runs)
    oracle     online estimator with estimate() and observe(action, outcome)
    env        environment with theta(context), values(theta), draw(a, theta)
               and reward(a, outcome)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .dec_utils import (GAMMA_BRACKET, LossFn, belief_values, fuzzy_dec_from_tables,
                        loss_table, model_values)
from .env_utils import EnvContext
from .error_utils import InvalidParameterError, RobustDecError
from .estimator_utils import EstimationLedger
from .numpy_utils import describe, make_rng
from .prob_utils import Dist, OutcomeSpace

__all__ = ['E2DConfig', 'RoundRecord', 'E2DTranscript', 'BanditProblem', 'select_policy',
           'select_policy_from_tables', 'run_e2d', 'theorem1_rhs']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class E2DConfig:
    """
    Parameters of one E2D run.

    Inputs:
        T - Number of rounds (>= 1).
        delta - Failure probability in (0, 1).
        beta_budget - Inaccuracy budget of the estimator (> 0).
        loss - LossFn. (Default: squared Hellinger)
        gamma_bracket - Positive gamma range for the fuzzy DEC search.
    """

    T: int
    delta: float
    beta_budget: float
    loss: LossFn = field(default_factory=LossFn)
    gamma_bracket: tuple = GAMMA_BRACKET

    def __post_init__(self):
        if self.T < 1:
            raise InvalidParameterError('T must be at least 1, got {}'.format(self.T))
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameterError('delta must lie in (0, 1), got {}'.format(self.delta))
        if self.beta_budget <= 0:
            raise InvalidParameterError('beta_budget must be positive, got {}'.format(self.beta_budget))
        lo, hi = self.gamma_bracket
        if not 0 < lo < hi:
            raise InvalidParameterError('gamma bracket must be 0 < low < high, got {}'.format(self.gamma_bracket))

    @property
    def eps_sq(self):
        return self.beta_budget / self.T


@dataclass
class RoundRecord:
    t: int
    p: np.ndarray
    action: int
    outcome: Any
    reward: float
    inst_regret: dict
    sampled_regret: dict
    dec_value: float
    gamma: float
    estimate_values: np.ndarray
    surviving: list
    star: Optional[float] = None
    flags: list = field(default_factory=list)


@dataclass
class E2DTranscript:
    """
    Per-round records plus running totals of one run.
    """

    true_labels: list
    rounds: list = field(default_factory=list)
    cum_regret: dict = field(default_factory=dict)
    cum_sampled_regret: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    true_rejections: list = field(default_factory=list)
    ledger: Optional[EstimationLedger] = None

    def __post_init__(self):
        if self.ledger is None:
            self.ledger = EstimationLedger(self.true_labels)

    def __len__(self):
        return len(self.rounds)

    @property
    def cum_loss(self):
        return self.ledger.cumulative_loss

    @property
    def cum_optimism(self):
        return self.ledger.cumulative_optimism

    @property
    def ledger_history(self):
        return self.ledger.history

    @property
    def degenerate_rounds(self):
        return sum(1 for rec in self.rounds if 'degenerate' in rec.flags)

    @property
    def max_dec(self):
        return max((rec.dec_value for rec in self.rounds), default=0.0)


class BanditProblem:
    """
    Tables for robust bandits: actions are arms, hypotheses are Models.

    Inputs:
        H - ModelClass.
        r - RewardFn.
        loss - LossFn. (Default: squared Hellinger)
    """

    def __init__(self, H, r, loss=None):
        self.H = H
        self.r = r
        self.loss = loss or LossFn()
        self.labels = H.labels
        self.maxf = np.asarray([model_values(M, r)[1] for M in H])

    @property
    def n_actions(self):
        return self.r.n_actions

    def tables(self, estimate):
        """Belief values f^Mhat (n_actions,) and losses (|H|, n_actions)."""
        return belief_values(estimate, self.r), loss_table(estimate, self.H, self.loss)


def select_policy_from_tables(maxf, fbar, L, eps_sq, gamma_bracket=GAMMA_BRACKET):
    """
    Action distribution of one E2D round from tables of the surviving hypotheses.

    Outputs:
        p - Array over actions.
        value - Fuzzy DEC value (nan when degenerate).
        gamma - Minimizing gamma (nan when degenerate).
        degenerate - True when no hypothesis survives; p is then uniform.
    """

    n_act = len(fbar)
    if len(maxf) == 0:
        return np.full(n_act, 1.0 / n_act), float('nan'), float('nan'), True
    value, p, gamma = fuzzy_dec_from_tables(maxf, fbar, L, np.sqrt(eps_sq), bracket=gamma_bracket)
    return p, value, gamma, False


def select_policy(H_t, Mhat_t, eps_sq, loss, r):
    """
    E2D action distribution for surviving hypotheses H_t (a list, possibly empty).

    Outputs:
        p - Dist over actions.
        degenerate - True when H_t is empty and p is the uniform fallback.
    """

    H_t = list(H_t)
    maxf = np.asarray([model_values(M, r)[1] for M in H_t])
    fbar = belief_values(Mhat_t, r)
    L = loss_table(Mhat_t, H_t, loss) if H_t else np.zeros((0, r.n_actions))
    p, _, _, degenerate = select_policy_from_tables(maxf, fbar, L, eps_sq)
    space = OutcomeSpace(tuple('a:{}'.format(a) for a in r.actions))
    return Dist(space, p), degenerate


def theorem1_rhs(T, dec, alpha, delta):
    """Regret bound 2 T dec + alpha + 2 T delta."""
    return float(2.0 * T * dec + alpha + 2.0 * T * delta)


def run_e2d(config, problem, oracle, env, seed, true_labels, policy_rng=None):
    """
    Run E2D for config.T rounds.

    Inputs:
        config - E2DConfig.
        problem - BanditProblem or another object with labels, maxf, n_actions and
            tables(estimate).
        oracle - Online estimator.
        env - Environment.
        seed - Run seed; the action stream is make_rng(seed, 'policy').
        true_labels - Labels of hypotheses the environment is consistent with; regret
            and ledgers are reported against each.
        policy_rng - Override for the action stream. (Default: None)
    Outputs:
        transcript - E2DTranscript.
    If a package error interrupts the run, the partial transcript is attached to the
    exception as .transcript before it propagates.
    """

    rng = policy_rng if policy_rng is not None else make_rng(seed, 'policy')
    labels = list(problem.labels)
    true_labels = list(true_labels)
    true_idx = [labels.index(label) for label in true_labels]
    cum_filter = np.zeros(len(labels))
    surviving = np.ones(len(labels), dtype=bool)
    transcript = E2DTranscript(true_labels=true_labels,
                               cum_regret={label: 0.0 for label in true_labels},
                               cum_sampled_regret={label: 0.0 for label in true_labels})
    history = []
    logger.info('E2D: %d rounds, %d hypotheses, eps^2 = %.4g', config.T, len(labels), config.eps_sq)

    try:
        for t in range(config.T):
            estimate = oracle.estimate()
            fbar, L = problem.tables(estimate)
            p, value, gamma, degenerate = select_policy_from_tables(
                problem.maxf[surviving], fbar, L[surviving], config.eps_sq, config.gamma_bracket)
            flags = ['degenerate'] if degenerate else []
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug('round %d: p %s, estimate values %s, %d surviving', t + 1, describe(p), describe(fbar),
                             int(surviving.sum()))

            theta = env.theta(EnvContext(t=t, history=list(history), estimate=estimate))
            env_vals = env.values(theta)
            a = int(rng.choice(len(p), p=p))
            outcome = env.draw(a, theta)
            reward = env.reward(a, outcome)

            inst, sampled = {}, {}
            for label, i in zip(true_labels, true_idx):
                inst[label] = float(problem.maxf[i] - p @ env_vals)
                sampled[label] = float(problem.maxf[i] - reward)
                transcript.cum_regret[label] += inst[label]
                transcript.cum_sampled_regret[label] += sampled[label]

            expected_loss = L @ p
            round_loss = {label: max(0.0, float(expected_loss[i])) for label, i in zip(true_labels, true_idx)}
            transcript.ledger.record(round_loss, float(p @ (fbar - env_vals)))

            cum_filter += expected_loss
            was_alive = surviving.copy()
            surviving = cum_filter <= config.beta_budget
            for i in true_idx:
                if was_alive[i] and not surviving[i]:
                    transcript.true_rejections.append((t, labels[i]))
                    flags.append('rejected:{}'.format(labels[i]))

            star = oracle.observe(a, outcome)
            history.append((a, outcome))
            if getattr(env, 'monitor', None) is not None:
                new = [v for v in env.monitor.violations if v[0] == t]
                if new:
                    flags.append('violation')
                    transcript.violations.extend(new)

            transcript.rounds.append(RoundRecord(
                t=t + 1, p=p, action=a, outcome=outcome, reward=float(reward), inst_regret=inst,
                sampled_regret=sampled, dec_value=float(value) if not degenerate else 0.0,
                gamma=float(gamma), estimate_values=np.asarray(fbar),
                surviving=[labels[i] for i in np.flatnonzero(surviving)], star=star, flags=flags))
    except RobustDecError as err:
        err.transcript = transcript
        raise

    logger.info('E2D finished: cumulative regret %s', transcript.cum_regret)
    return transcript
