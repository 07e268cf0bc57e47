import numpy as np
import pytest

from robustdec import (CALIBRATION, FRAGMENT, PESSIMISM, UNIFORM, BettorIndex, CapacityError, DimensionError,
                       InvalidParameterError, MarketDegeneracyError, ParhalfHypothesis, RmdpMarketEstimator,
                       RmdpProblem, Trajectory, bettor_counts, build_bettor_index, enumerate_deterministic_policies,
                       grid_count, induce_mdp, market_update, parhalf_to_kernel, pessimism_eps, rmdp_reference_bound,
                       rmdp_market_bounds)

S, A, H = 2, 2, 1


@pytest.fixture
def market():
    return build_bettor_index(S, A, H, 0.5, 0.5, T=100)


@pytest.fixture
def policy():
    return enumerate_deterministic_policies(S, A, H)[1]


def _episode(pi, r0=1, s1=1, r1=0):
    return Trajectory(r0=r0, states=(s1,), actions=(int(pi.actions()[0, s1]),), rewards=(r1,))


class TestIndex:
    def test_grid_sizes(self):
        assert grid_count(1.0) == 2
        assert grid_count(0.5) == 3
        assert grid_count(0.1) == 11
        assert bettor_counts(1, 1, 1, 1.0, 1.0)['mid'] == 4
        assert bettor_counts(2, 2, 2, 0.5, 0.5)['mid'] == 27

    def test_counts_match_enumeration(self):
        for args in [(1, 1, 1, 1.0, 1.0), (2, 2, 1, 0.5, 0.5), (2, 1, 2, 1.0, 0.5)]:
            index = BettorIndex(*args)
            counts = index.counts
            assert index.size == counts['total']
            assert int(np.sum(index.kind == FRAGMENT)) == counts['fragment']
            assert int(np.sum(index.kind == CALIBRATION)) == counts['calibration']
            assert int(np.sum(index.kind == UNIFORM)) == counts['uniform']
            assert int(np.sum(index.kind == PESSIMISM)) == 1

    def test_limits(self):
        with pytest.raises(InvalidParameterError):
            BettorIndex(1, 1, 0, 1.0, 1.0)
        with pytest.raises(CapacityError) as info:
            BettorIndex(2, 2, 2, 0.5, 0.5, max_bettors=50)
        assert info.value.counts['total'] > 50

    def test_lookup(self):
        index = BettorIndex(1, 1, 1, 1.0, 1.0)
        i = index.find(UNIFORM, 1, 0, 0)
        assert index.describe(i) == 'uniform(h=1, s=0, a=0, set=-1)'
        assert index.describe(index.pessimism) == 'pessimism'
        with pytest.raises(InvalidParameterError):
            index.belief_of(index.pessimism)


class TestPrior:
    def test_shares(self, market):
        index, zeta = market
        assert zeta.weights.sum() == pytest.approx(1.0)
        assert zeta.pessimism_weight == pytest.approx(0.499)
        assert zeta.uniform_weight == pytest.approx(0.001)
        assert zeta.family_weight(FRAGMENT) + zeta.family_weight(CALIBRATION) == pytest.approx(0.5)
        informed = zeta.weights[(index.kind == FRAGMENT) | (index.kind == CALIBRATION)]
        assert np.ptp(informed) == pytest.approx(0.0)

    def test_eps_prime_range(self):
        with pytest.raises(InvalidParameterError):
            build_bettor_index(1, 1, 1, 1.0, 1.0, eps_prime=0.02)

    def test_scales(self):
        assert pessimism_eps(100, 2) == pytest.approx(1.0 / 30.0)
        assert pessimism_eps(None, 3) == pytest.approx(0.25)
        assert rmdp_reference_bound(2, 2, 2, 0.1) == pytest.approx(0.2 * np.sqrt(18.0))

    def test_rmdp_market_bounds(self):
        beta, alpha = rmdp_market_bounds(2, 2, 1, 100, 0.05, 0.5, 0.5)
        expected_beta = 34 * (np.log(3.0) + 2 * np.log(3.0) + np.log(16 * 5 * 3 / 0.05 ** 2)) + 2 * 100 * 2 * 1.0
        expected_alpha = 2 * 10 * (np.log(80.0) + 1 + np.sqrt(2 * np.log(40.0))) + 4
        assert beta == pytest.approx(expected_beta)
        assert alpha == pytest.approx(expected_alpha)


class TestInducedMDP:
    def test_full_support_and_value(self, market, policy):
        _, zeta = market
        induced = induce_mdp(zeta, policy)
        assert induced.min_probability() > 0
        assert 0.0 <= induced.value <= H + 1
        assert sum(induced.traj_dist(policy).values()) == pytest.approx(1.0)
        assert induced.cal_x.min() >= 0

    def test_cache_shares_layers(self, market):
        _, zeta = market
        cache = {}
        policies = enumerate_deterministic_policies(S, A, H)
        for pi in policies:
            induce_mdp(zeta, pi, cache=cache)
        # the last layer is shared; layer 0 is solved once per policy
        assert len(cache) == len(policies) + 1

    def test_policy_shape(self, market):
        _, zeta = market
        with pytest.raises(DimensionError):
            induce_mdp(zeta, enumerate_deterministic_policies(1, 2, 1)[0])


class TestUpdate:
    def test_bets(self, market, policy):
        index, zeta = market
        induced = induce_mdp(zeta, policy)
        traj = _episode(policy)
        new, star, bets = market_update(zeta, induced, policy, traj, return_bets=True)
        assert star == pytest.approx(1.0, abs=1e-3)
        assert new.weights.sum() == pytest.approx(1.0)
        assert new.round == 1
        cal = bets[index.cal_ids]
        assert np.all(cal >= 0.75 - 1e-12) and np.all(cal <= 1.25 + 1e-12)
        assert bets[index.pessimism] == pytest.approx(1.0 + zeta.eps_pess * (induced.value - traj.total_reward))

    def test_episode_checks(self, market, policy):
        _, zeta = market
        induced = induce_mdp(zeta, policy)
        with pytest.raises(InvalidParameterError):
            market_update(zeta, induced, policy, Trajectory(r0=0.5, states=(0,), actions=(0,), rewards=(1,)))
        with pytest.raises(DimensionError):
            market_update(zeta, induced, policy, Trajectory(r0=1))

    def test_degenerate_market(self, market, policy):
        index, zeta = market
        weights = np.array(zeta.weights)
        weights[index.uniform_ids] = 0.0
        weights /= weights.sum()
        with pytest.raises(MarketDegeneracyError):
            induce_mdp(type(zeta)(index, weights), policy)


class TestEstimator:
    def test_rounds(self):
        policies = enumerate_deterministic_policies(S, A, H)
        est = RmdpMarketEstimator(S, A, H, 10, 0.5, 0.5, policies)
        assert len(est.estimate()) == len(policies)
        for i, traj in enumerate([_episode(policies[0]), _episode(policies[3], r0=0, s1=0, r1=1)]):
            star = est.observe(0 if i == 0 else 3, traj)
            assert star == pytest.approx(1.0, abs=1e-3)
        assert est.zeta.round == 2
        assert est.beta_bound(0.05) == pytest.approx(rmdp_market_bounds(S, A, H, 10, 0.05, 0.5, 0.5)[0])

    def test_rewards_are_rounded(self):
        policies = enumerate_deterministic_policies(S, A, H)
        est = RmdpMarketEstimator(S, A, H, 10, 0.5, 0.5, policies)
        traj = est.convert(Trajectory(r0=0.4, states=(0,), actions=(0,), rewards=(1.0,)))
        assert traj.is_binary
        assert traj.rewards == (1,)


class TestProblem:
    def test_tables(self, market):
        _, zeta = market
        rec = np.zeros((H + 1, S), dtype=int)
        P = ParhalfHypothesis(H, S, A, rec, np.full((H + 1, S, S), 0.5), np.full((H + 1, S), 0.4))
        policies = enumerate_deterministic_policies(S, A, H)
        problem = RmdpProblem([('stay', parhalf_to_kernel(P))], policies)
        assert problem.maxf == pytest.approx([0.4])
        fbar, L = problem.tables([induce_mdp(zeta, pi) for pi in policies])
        assert fbar.shape == (len(policies),)
        assert L.shape == (1, len(policies))
        assert np.all(L >= 0)
        with pytest.raises(InvalidParameterError):
            RmdpProblem([('a', parhalf_to_kernel(P)), ('a', parhalf_to_kernel(P))], policies)
