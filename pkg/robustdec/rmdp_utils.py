"""
Tabular robust MDPs with binary rewards.

Layout conventions used throughout:
    * layers h = 0..H; layer 0 has the single cell (0, s0=0, a0=0), layers 1..H have
      one cell per (s, a);
    * a cell at h < H is a belief over (reward bit, next state) with outcome index
      r * S + s'; a cell at h = H is a belief over the reward bit alone;
    * a trajectory key is (r0, s1, a1, r1, ..., sH, aH, rH);
    * a selection maps every cell key (h, s, a) to a member distribution (array).
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .belief_utils import ABS_TOL, FullSimplex, Halfspace, ImpreciseBelief
from .error_utils import (CoherenceError, DimensionError, InvalidParameterError,
                          InvariantViolationError, PreconditionError)
from .numpy_utils import lowest_argmax, make_rng, random_simplex
from .prob_utils import OutcomeSpace, hellinger_sq

__all__ = ['TERMINAL_SPACE', 'RMDPKernel', 'Policy', 'Trajectory', 'ParhalfHypothesis',
           'cell_space', 'cell_keys', 'parhalf_to_kernel', 'is_value_consistent', 'default_selection',
           'worst_case_selection', 'selection_value', 'rollout', 'traj_dist', 'robust_value',
           'robust_q_value', 'robust_optimal_policy', 'certify_one_bounded', 'surrogate',
           'modified_loss', 'modified_loss_product', 'reach_probabilities', 'round_halfspace',
           'enumerate_deterministic_policies', 'random_policy', 'convert_reward',
           'RmdpEnvironment']

logger = logging.getLogger(__name__)

TERMINAL_SPACE = OutcomeSpace((0, 1))
VALUE_TOL = 1e-6
# floor() guard so on-grid values survive floating-point division
GRID_GUARD = 1e-9


def cell_space(H, S, h):
    return TERMINAL_SPACE if h == H else OutcomeSpace.reward_state(S)


def cell_keys(H, S, A):
    """All cell keys in layer order."""
    keys = [(0, 0, 0)]
    for h in range(1, H + 1):
        keys.extend((h, s, a) for s in range(S) for a in range(A))
    return keys


def _layer_states(h, S):
    return range(1) if h == 0 else range(S)


def _layer_actions(h, A):
    return range(1) if h == 0 else range(A)


def _next_value_vector(h, H, S, V_next):
    """Per-outcome r + V_{h+1}(s') for a cell at layer h."""
    if h == H:
        return np.array([0.0, 1.0])
    return np.concatenate([V_next, V_next + 1.0])


class RMDPKernel:
    """
    Robust transition kernel.

    Inputs:
        H - Horizon (number of decision layers after the initial one).
        S, A - State and action counts.
        cells - Dict (h, s, a) -> ImpreciseBelief for every key of cell_keys(H, S, A).
        certified_one_bounded - Set when the kernel is 1-bounded by construction.
            (Default: False)
    """

    def __init__(self, H, S, A, cells, certified_one_bounded=False):
        if H < 0 or S < 1 or A < 1:
            raise InvalidParameterError('need H >= 0, S >= 1, A >= 1; got {}, {}, {}'.format(H, S, A))
        self.H, self.S, self.A = int(H), int(S), int(A)
        expected = cell_keys(self.H, self.S, self.A)
        missing = [k for k in expected if k not in cells]
        extra = [k for k in cells if k not in set(expected)]
        if missing or extra:
            raise DimensionError('kernel cells do not match the layout; missing {}, unexpected {}'.format(
                missing[:5], extra[:5]))
        for key in expected:
            belief = cells[key]
            if not isinstance(belief, ImpreciseBelief):
                raise InvalidParameterError('cell {} is not a belief'.format(key))
            if belief.space != cell_space(self.H, self.S, key[0]):
                raise DimensionError('cell {} lives on the wrong outcome space'.format(key))
        self.cells = {k: cells[k] for k in expected}
        self.certified_one_bounded = bool(certified_one_bounded)

    def cell(self, h, s, a):
        return self.cells[(h, s, a)]

    def space(self, h):
        return cell_space(self.H, self.S, h)

    def keys(self):
        return list(self.cells)


class Policy:
    """
    Randomized non-stationary Markov policy for layers 1..H.

    Inputs:
        probs - Array of shape (H, S, A); probs[h-1, s] is the action distribution at (h, s).
    """

    def __init__(self, probs):
        probs = np.array(probs, dtype=float)
        if probs.ndim != 3:
            raise DimensionError('policy must have shape (H, S, A), got {}'.format(probs.shape))
        if np.any(probs < 0) or not np.allclose(probs.sum(axis=2), 1.0, atol=1e-9):
            raise InvalidParameterError('policy rows must be distributions')
        probs.setflags(write=False)
        self.probs = probs
        self.H, self.S, self.A = probs.shape

    @classmethod
    def deterministic(cls, actions, A):
        actions = np.asarray(actions, dtype=int)
        return cls(np.eye(A)[actions])

    def row(self, h, s):
        """Action distribution at (h, s); layer 0 always plays action 0."""
        if h == 0:
            return np.eye(self.A)[0]
        return self.probs[h - 1, s]

    @property
    def is_deterministic(self):
        return bool(np.all((self.probs == 0) | (self.probs == 1)))

    def actions(self):
        """Array (H, S) of actions of a deterministic policy."""
        return np.argmax(self.probs, axis=2)

    def tail_key(self, h):
        """Bytes identifying the policy on layers h+1..H."""
        return self.probs[h:].tobytes()

    def key(self):
        return self.probs.tobytes()

    def __repr__(self):
        if self.is_deterministic:
            return 'Policy({})'.format(self.actions().tolist())
        return 'Policy(randomized, H={}, S={}, A={})'.format(self.H, self.S, self.A)


@dataclass(frozen=True)
class Trajectory:
    """
    One episode r0, s1, a1, r1, ..., sH, aH, rH.

    Rewards are bits after conversion; violations lists the cells at which the
    selection emitted a non-member.
    """

    r0: float
    states: tuple = ()
    actions: tuple = ()
    rewards: tuple = ()
    violations: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if not len(self.states) == len(self.actions) == len(self.rewards):
            raise DimensionError('trajectory fields have different lengths')

    @property
    def H(self):
        return len(self.states)

    def key(self):
        out = [int(self.r0)]
        for s, a, r in zip(self.states, self.actions, self.rewards):
            out.extend((int(s), int(a), int(r)))
        return tuple(out)

    @classmethod
    def from_key(cls, key):
        H = (len(key) - 1) // 3
        return cls(r0=key[0], states=tuple(key[1::3][:H]), actions=tuple(key[2::3][:H]),
                   rewards=tuple(key[3::3][:H]))

    @property
    def all_rewards(self):
        return (self.r0,) + tuple(self.rewards)

    @property
    def total_reward(self):
        return float(sum(self.all_rewards))

    @property
    def is_binary(self):
        return all(r in (0, 1) for r in self.all_rewards)


@dataclass(frozen=True, eq=False)
class ParhalfHypothesis:
    """
    Partial-halfspace hypothesis: at each (h, s) one recommended action whose cell is
    {mu : E_mu[f_{h,s}(s') + r] >= c_{h,s}}; every other action is unconstrained.

    Inputs:
        H, S, A - Sizes.
        rec - Int array (H+1, S) of recommended actions; rec[0, 0] must be 0 and
            other row-0 entries are ignored.
        f - Array (H+1, S, S) of per-next-state values in [0, 1]; layer H is ignored.
        c - Array (H+1, S) of thresholds in [0, 1].
    """

    H: int
    S: int
    A: int
    rec: np.ndarray
    f: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        H, S = self.H, self.S
        rec = np.array(self.rec, dtype=int)
        f = np.array(self.f, dtype=float)
        c = np.array(self.c, dtype=float)
        if rec.shape != (H + 1, S) or f.shape != (H + 1, S, S) or c.shape != (H + 1, S):
            raise DimensionError('parhalf arrays have shapes {}, {}, {}'.format(rec.shape, f.shape, c.shape))
        if np.any(rec < 0) or np.any(rec >= self.A) or rec[0, 0] != 0:
            raise InvalidParameterError('recommended actions out of range')
        if np.any(f < -ABS_TOL) or np.any(f > 1 + ABS_TOL) or np.any(c < -ABS_TOL) or np.any(c > 1 + ABS_TOL):
            raise InvalidParameterError('parhalf values must lie in [0, 1]')
        for name, arr in (('rec', rec), ('f', f), ('c', c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def label(self):
        return 'parhalf[{}]'.format(abs(hash((self.rec.tobytes(), self.f.tobytes(), self.c.tobytes()))) % 10 ** 8)


def parhalf_to_kernel(P):
    """
    Kernel of a partial-halfspace hypothesis.

    Non-recommended actions get FullSimplex cells; the recommended cell at h < H is
    Halfspace(g, c) with g[r * S + s'] = f(s') + r, and at h = H it is {E[r] >= c}.
    The kernel is marked certified 1-bounded only when P is value-consistent; see
    is_value_consistent.
    """

    H, S, A = P.H, P.S, P.A
    cells = {}
    for h, s, a in cell_keys(H, S, A):
        space = cell_space(H, S, h)
        if a != P.rec[h, s]:
            cells[(h, s, a)] = FullSimplex(space)
        elif h == H:
            cells[(h, s, a)] = Halfspace(space, [0.0, 1.0], P.c[h, s])
        else:
            g = np.concatenate([P.f[h, s], P.f[h, s] + 1.0])
            cells[(h, s, a)] = Halfspace(space, g, P.c[h, s])
    kernel = RMDPKernel(H, S, A, cells)
    kernel.certified_one_bounded = is_value_consistent(P, kernel)
    return kernel


def is_value_consistent(P, kernel=None, tol=VALUE_TOL):
    """
    True when the thresholds of P are its own robust optimal values:
    c[h, s] = V[h, s] on every layer state and f[h, s] = V[h + 1] for h < H.

    Such a hypothesis has robust optimal value at most max(c) <= 1, so every policy
    is 1-bounded on it.
    """

    kernel = kernel if kernel is not None else parhalf_to_kernel(P)
    _, V, _ = _optimal(kernel)
    for h in range(P.H + 1):
        for s in _layer_states(h, P.S):
            if abs(P.c[h, s] - V[h, s]) > tol:
                return False
            if h < P.H and np.max(np.abs(P.f[h, s] - V[h + 1])) > tol:
                return False
    return True


def enumerate_deterministic_policies(S, A, H):
    """All A^(H S) deterministic Markov policies, in lexicographic order."""
    policies = []
    for choice in itertools.product(range(A), repeat=H * S):
        policies.append(Policy.deterministic(np.asarray(choice, dtype=int).reshape(H, S), A))
    return policies


def random_policy(S, A, H, rng):
    return Policy(random_simplex(A, rng, size=(H, S)))


def convert_reward(r, rng):
    """Bernoulli rounding of a reward in [0, 1] to a bit."""
    if not 0.0 <= r <= 1.0:
        raise InvalidParameterError('reward {} outside [0, 1]'.format(r))
    if r in (0, 1):
        return int(r)
    return int(rng.random() < r)


def default_selection(kernel):
    """A fixed member per cell: the Hellinger projection of the uniform distribution."""
    selection = {}
    for key, belief in kernel.cells.items():
        selection[key] = belief.project(np.full(belief.size, 1.0 / belief.size))[0]
    return selection


def _robust_backup(kernel, V, h, s, a):
    vec = _next_value_vector(h, kernel.H, kernel.S, V[h + 1])
    return kernel.cell(h, s, a).worst_case(vec)


def robust_q_value(kernel, V, h, s, a):
    """min over the cell of E[r + V_{h+1}(s')] given next-layer values V."""
    return _robust_backup(kernel, V, h, s, a)[0]


def robust_value(kernel, pi, return_witnesses=False):
    """
    Robust value of a policy by downward induction.

    Inputs:
        kernel - RMDPKernel.
        pi - Policy.
        return_witnesses - If True, also return the per-cell minimizing members.
            (Default: False)
    Outputs:
        V - Array (H+2, S); V[H+1] = 0 and only V[0, 0] is used on layer 0.
        one_bounded - True when V <= 1 everywhere for pi and for the robust-optimal
            policy (or when the kernel is certified by construction).
        witnesses - Only if return_witnesses.
    """

    V, witnesses = _evaluate(kernel, pi)
    one_bounded = bool(np.max(V) <= 1.0 + VALUE_TOL)
    if one_bounded and not kernel.certified_one_bounded:
        _, V_star, _ = _optimal(kernel)
        one_bounded = bool(np.max(V_star) <= 1.0 + VALUE_TOL)
    if return_witnesses:
        return V, one_bounded, witnesses
    return V, one_bounded


def _evaluate(kernel, pi):
    H, S, A = kernel.H, kernel.S, kernel.A
    if (pi.H, pi.S, pi.A) != (H, S, A) and H > 0:
        raise DimensionError('policy shape {} does not match kernel {}'.format((pi.H, pi.S, pi.A), (H, S, A)))
    V = np.zeros((H + 2, S))
    witnesses = {}
    for h in range(H, -1, -1):
        for s in _layer_states(h, S):
            row = pi.row(h, s) if h > 0 else np.array([1.0])
            total = 0.0
            for a in _layer_actions(h, A):
                if h > 0 and row[a] <= 0:
                    continue
                q, w = _robust_backup(kernel, V, h, s, a)
                witnesses[(h, s, a)] = w
                total += row[a] * q
            V[h, s] = total
    return V, witnesses


def _optimal(kernel):
    H, S, A = kernel.H, kernel.S, kernel.A
    V = np.zeros((H + 2, S))
    actions = np.zeros((max(H, 1), S), dtype=int)
    witnesses = {}
    for h in range(H, -1, -1):
        for s in _layer_states(h, S):
            qs, ws = [], []
            for a in _layer_actions(h, A):
                q, w = _robust_backup(kernel, V, h, s, a)
                qs.append(q)
                ws.append(w)
            best = lowest_argmax(qs)
            V[h, s] = qs[best]
            for a, w in enumerate(ws):
                witnesses[(h, s, a)] = w
            if h > 0:
                actions[h - 1, s] = best
    pi = Policy.deterministic(actions[:H], A) if H > 0 else Policy(np.zeros((0, S, A)))
    return pi, V, witnesses


def robust_optimal_policy(kernel):
    """
    Deterministic policy maximizing the robust Q-value at every (h, s); ties go to
    the lowest action index.
    """

    return _optimal(kernel)[0]


def certify_one_bounded(kernel, rng=None, n_policies=20):
    """
    Check V <= 1 for the robust-optimal policy and a grid of random policies.

    A certified-by-construction kernel passes immediately.
    """

    if kernel.certified_one_bounded:
        return True
    _, V, _ = _optimal(kernel)
    if np.max(V) > 1.0 + VALUE_TOL:
        return False
    rng = rng if rng is not None else make_rng(0, 'one-bounded')
    for _ in range(n_policies):
        V, _ = _evaluate(kernel, random_policy(kernel.S, kernel.A, kernel.H, rng))
        if np.max(V) > 1.0 + VALUE_TOL:
            return False
    return True


def worst_case_selection(kernel, pi):
    """Selection made of the robust-value witnesses for pi (one member per cell)."""
    _, witnesses = _evaluate(kernel, pi)
    selection = default_selection(kernel)
    selection.update(witnesses)
    return selection


def reach_probabilities(selection, pi, H, S):
    """
    Forward occupancies under a per-cell selection.

    Outputs:
        occ - List over h of arrays (S, A) with P(s_h = s, a_h = a); layer 0 is (1, 1).
    """

    A = pi.A
    occ = [np.ones((1, 1))]
    for h in range(1, H + 1):
        state = np.zeros(S)
        prev = occ[-1]
        for s in range(prev.shape[0]):
            for a in range(prev.shape[1]):
                if prev[s, a] > 0:
                    cell = np.asarray(selection[(h - 1, s, a)])
                    state += prev[s, a] * (cell[:S] + cell[S:])
        occ.append(state[:, None] * pi.probs[h - 1])
    return occ


def selection_value(selection, pi, H, S):
    """Expected total reward sum_h r_h under a selection and a policy."""
    occ = reach_probabilities(selection, pi, H, S)
    total = 0.0
    for h, layer in enumerate(occ):
        for s in range(layer.shape[0]):
            for a in range(layer.shape[1]):
                if layer[s, a] > 0:
                    cell = np.asarray(selection[(h, s, a)])
                    reward_mass = cell[1] if h == H else cell[S:].sum()
                    total += layer[s, a] * reward_mass
    return float(total)


def traj_dist(selection, pi, H=None, S=None):
    """
    Exact distribution over trajectories for a history-independent selection.

    Inputs:
        selection - Dict (h, s, a) -> probability vector.
        pi - Policy.
        H, S - Sizes; default to the policy's.
    Outputs:
        dist - Dict trajectory key -> probability (only positive entries).
    """

    H = pi.H if H is None else H
    S = pi.S if S is None else S
    A = pi.A
    out = {}

    def expand(h, s, a, prefix, prob):
        cell = np.asarray(selection[(h, s, a)])
        if h == H:
            for r in (0, 1):
                if cell[r] > 0:
                    out[prefix + (r,)] = prob * cell[r]
            return
        row_cache = {}
        for r in (0, 1):
            for s2 in range(S):
                q = prob * cell[r * S + s2]
                if q <= 0:
                    continue
                row = row_cache.setdefault(s2, pi.row(h + 1, s2))
                for a2 in range(A):
                    if row[a2] > 0:
                        expand(h + 1, s2, a2, prefix + (r, s2, a2), q * row[a2])

    expand(0, 0, 0, (), 1.0)
    return out


def _key_parts(h, H):
    """Positions of (s_h, a_h) and of the layer-h outcome in a trajectory key."""
    if h == 0:
        sa = None
    else:
        sa = (1 + 3 * (h - 1), 2 + 3 * (h - 1))
    r_pos = 0 if h == 0 else 3 + 3 * (h - 1)
    s_next = r_pos + 1 if h < H else None
    return sa, r_pos, s_next


def rollout(source, pi, rng, kernel=None):
    """
    Sample one episode.

    Inputs:
        source - RMDPKernel (its default selection is used), a selection dict, or a
            callable (h, s, a, prefix) -> probability vector for history-dependent
            selections.
        pi - Policy.
        rng - numpy Generator.
        kernel - Kernel to check membership against. Defaults to source when source
            is a kernel. (Default: None)
    Outputs:
        traj - Trajectory; violations lists cells where a non-member was emitted.
    """

    if isinstance(source, RMDPKernel):
        kernel = source if kernel is None else kernel
        selection = default_selection(source)
        choose = lambda h, s, a, prefix: selection[(h, s, a)]
        H, S = source.H, source.S
    else:
        if callable(source):
            choose = source
        else:
            choose = lambda h, s, a, prefix: source[(h, s, a)]
        H, S = pi.H, pi.S

    violations = []
    prefix = ()
    states, actions, rewards = [], [], []
    s, a, r0 = 0, 0, None
    for h in range(H + 1):
        dist = np.asarray(choose(h, s, a, prefix), dtype=float)
        if kernel is not None and not kernel.cell(h, s, a).contains(dist):
            violations.append((h, s, a))
            logger.warning('selection emitted a non-member at cell %s', (h, s, a))
        o = int(rng.choice(len(dist), p=dist / dist.sum()))
        if h == H:
            r, s2 = o, None
        else:
            r, s2 = divmod(o, S)
        if h == 0:
            r0 = r
            prefix = (r,)
        else:
            rewards.append(r)
            prefix = prefix + (r,)
        if h < H:
            a2 = int(rng.choice(pi.A, p=pi.row(h + 1, s2)))
            states.append(s2)
            actions.append(a2)
            prefix = prefix + (s2, a2)
            s, a = s2, a2
    return Trajectory(r0=r0, states=tuple(states), actions=tuple(actions), rewards=tuple(rewards),
                      violations=tuple(violations))


def _conditionals(Mbar_pi, H, S, A):
    """Occupancies P(h, s, a) and unnormalized outcome masses per layer cell."""
    occ, mass = {}, {}
    for key, prob in Mbar_pi.items():
        for h in range(H + 1):
            sa, r_pos, s_next = _key_parts(h, H)
            cell = (h, 0, 0) if sa is None else (h, key[sa[0]], key[sa[1]])
            r = key[r_pos]
            o = r if h == H else r * S + key[s_next]
            n_out = 2 if h == H else 2 * S
            occ[cell] = occ.get(cell, 0.0) + prob
            mass.setdefault(cell, np.zeros(n_out))[o] += prob
    return occ, mass


def _check_coherence(Mbar_pi, pi, H, tol=1e-6):
    prefix_mass, action_mass = {}, {}
    for key, prob in Mbar_pi.items():
        for h in range(1, H + 1):
            s_pos, a_pos = 1 + 3 * (h - 1), 2 + 3 * (h - 1)
            prefix = key[:a_pos]
            prefix_mass[prefix] = prefix_mass.get(prefix, 0.0) + prob
            action_mass[(prefix, key[a_pos])] = action_mass.get((prefix, key[a_pos]), 0.0) + prob
    for prefix, total in prefix_mass.items():
        if total <= 0:
            continue
        h = (len(prefix) - 1) // 3 + 1
        s = prefix[-1]
        row = pi.row(h, s)
        for a in range(pi.A):
            cond = action_mass.get((prefix, a), 0.0) / total
            if abs(cond - row[a]) > tol:
                raise CoherenceError('P(a_{} = {} | history {}) = {:.6g} but the policy plays {:.6g}'.format(
                    h, a, prefix, cond, row[a]))


def modified_loss(Mbar_pi, kernel, pi):
    """
    Expected sum over layers of D^2(conditional outcome distribution at (h, s_h, a_h)
    -> kernel cell), for a distribution over trajectories.

    Inputs:
        Mbar_pi - Dict trajectory key -> probability, coherent with pi.
        kernel - RMDPKernel.
        pi - Policy.
    Outputs:
        loss - Non-negative real; cells of probability zero contribute nothing.
    Raises CoherenceError when action frequencies disagree with pi.
    """

    H, S, A = kernel.H, kernel.S, kernel.A
    total = sum(Mbar_pi.values())
    if abs(total - 1.0) > 1e-6:
        raise InvalidParameterError('trajectory distribution sums to {}'.format(total))
    _check_coherence(Mbar_pi, pi, H)
    occ, mass = _conditionals(Mbar_pi, H, S, A)
    loss = 0.0
    for cell, p in occ.items():
        if p <= 0:
            continue
        cond = mass[cell] / p
        loss += p * kernel.cell(*cell).project(cond)[1]
    return float(loss)


def modified_loss_product(selection, kernel, pi):
    """
    modified_loss for the product-form distribution traj_dist(selection, pi), where
    each conditional equals the selected cell distribution.
    """

    H, S = kernel.H, kernel.S
    occ = reach_probabilities(selection, pi, H, S)
    loss = 0.0
    for h, layer in enumerate(occ):
        for s in range(layer.shape[0]):
            for a in range(layer.shape[1]):
                if layer[s, a] > 0:
                    loss += layer[s, a] * kernel.cell(h, s, a).project(np.asarray(selection[(h, s, a)]))[1]
    return float(loss)


def surrogate(kernel, rng=None, n_samples=1000):
    """
    Partial-halfspace surrogate of a 1-bounded kernel.

    With pi* the robust-optimal policy and V its robust value, (h, s) recommends
    pi*(h, s) with f_{h,s} = V_{h+1, .} and c_{h,s} = V_{h,s}. After construction the
    function checks value agreement, equal optimal values, and that sampled members
    of the recommended kernel cells belong to the surrogate cells.

    Inputs:
        kernel - RMDPKernel.
        rng - Generator for membership samples; the random policies of the
            1-boundedness check use a stream seeded from it. (Default: seed 0
            'samples' stream)
        n_samples - Samples per recommended cell. (Default: 1000)
    Outputs:
        P - ParhalfHypothesis.
    Raises PreconditionError for kernels that are not 1-bounded and
    InvariantViolationError when a post-construction check fails.
    """

    H, S, A = kernel.H, kernel.S, kernel.A
    pi_star, V, _ = _optimal(kernel)
    rng = rng if rng is not None else make_rng(0, 'samples')
    cert_rng = make_rng(int(rng.integers(2 ** 32)), 'one-bounded')
    if not certify_one_bounded(kernel, rng=cert_rng):
        raise PreconditionError('kernel is not 1-bounded (max robust value {:.6g})'.format(np.max(V)))

    rec = np.zeros((H + 1, S), dtype=int)
    f = np.zeros((H + 1, S, S))
    c = np.zeros((H + 1, S))
    for h in range(H + 1):
        for s in _layer_states(h, S):
            if h > 0:
                rec[h, s] = pi_star.row(h, s).argmax()
            if h < H:
                f[h, s] = V[h + 1]
            c[h, s] = V[h, s]
    P = ParhalfHypothesis(H, S, A, rec, np.clip(f, 0.0, 1.0), np.clip(c, 0.0, 1.0))

    sur = parhalf_to_kernel(P)
    V_sur, _ = _evaluate(sur, pi_star)
    gap = np.max(np.abs(V_sur - V))
    if gap > VALUE_TOL:
        raise InvariantViolationError('surrogate values differ by {:.3g}'.format(gap), {'gap': gap})
    _, V_sur_star, _ = _optimal(sur)
    if abs(V_sur_star[0, 0] - V[0, 0]) > VALUE_TOL:
        raise InvariantViolationError('surrogate optimal value {:.6g} differs from {:.6g}'.format(
            V_sur_star[0, 0], V[0, 0]))

    for h in range(H + 1):
        for s in _layer_states(h, S):
            a = rec[h, s]
            members = kernel.cell(h, s, a).sample(n_samples, rng)
            target = sur.cell(h, s, a)
            bad = [m for m in members if not target.contains(m, tol=1e-7)]
            if bad:
                raise InvariantViolationError('{} sampled members of cell {} fall outside the surrogate'.format(
                    len(bad), (h, s, a)), {'cell': (h, s, a)})
    return P


def round_halfspace(f, c, eps_S, eps_01):
    """
    Round a halfspace description onto the grid: f up in steps of eps_S from 1, c down
    in steps of eps_01, so the rounded halfspace contains the original.

    Outputs:
        f_up - 1 - floor((1 - f) / eps_S) eps_S, per state.
        c_down - floor(c / eps_01) eps_01.
    """

    if eps_S <= 0 or eps_01 <= 0:
        raise InvalidParameterError('grid steps must be positive')
    f = np.asarray(f, dtype=float)
    f_up = 1.0 - np.floor((1.0 - f) / eps_S + GRID_GUARD) * eps_S
    c_down = float(np.floor(c / eps_01 + GRID_GUARD) * eps_01)
    return f_up, c_down


class RmdpEnvironment:
    """
    Environment for episodic runs where actions are policies.

    Inputs:
        kernel - True RMDPKernel.
        policies - Sequence of Policy (the action set).
        mode - 'worst-case' (robust-value witnesses of the played policy),
            'random-vertex' (a fresh random vertex per visited cell and episode) or
            'default' (default_selection). (Default: 'worst-case')
        rng - numpy Generator for nature.
        check - Record membership violations. (Default: True)
    """

    MODES = ('worst-case', 'random-vertex', 'default')

    def __init__(self, kernel, policies, rng, mode='worst-case', check=True):
        if mode not in self.MODES:
            raise InvalidParameterError('unknown RMDP environment mode {!r}'.format(mode))
        self.kernel = kernel
        self.policies = list(policies)
        self.rng = rng
        self.mode = mode
        self.check = check
        self.violations = []
        self.monitor = self if check else None
        self._t = 0
        self._fixed = None
        self._per_policy = {}

    def _selection(self, i):
        if self.mode == 'worst-case':
            if i not in self._per_policy:
                self._per_policy[i] = worst_case_selection(self.kernel, self.policies[i])
            return self._per_policy[i]
        if self._fixed is None:
            self._fixed = default_selection(self.kernel)
        return self._fixed

    def theta(self, context):
        """Per-round choice: for random-vertex a vertex per cell, else the stationary rule."""
        self._t = context.t
        if self.mode == 'random-vertex':
            selection = {}
            for key, belief in self.kernel.cells.items():
                V = belief.vertices()
                selection[key] = V[self.rng.integers(len(V))]
            return ('fixed', selection)
        return ('per-policy', None)

    def selection_for(self, theta, i):
        kind, selection = theta
        return selection if kind == 'fixed' else self._selection(i)

    def values(self, theta):
        H, S = self.kernel.H, self.kernel.S
        return np.asarray([selection_value(self.selection_for(theta, i), pi, H, S)
                           for i, pi in enumerate(self.policies)])

    def draw(self, i, theta):
        traj = rollout(self.selection_for(theta, i), self.policies[i], self.rng,
                       kernel=self.kernel if self.check else None)
        self.violations.extend((self._t, i, cell) for cell in traj.violations)
        return traj

    def reward(self, i, traj):
        return traj.total_reward
