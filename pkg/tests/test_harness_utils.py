import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import robustdec.harness_utils as harness
from robustdec import (CSV_COLUMNS, SUMMARY_KEYS, InvalidParameterError, SolverQualityError, aggregate, load_scenario,
                       log_slope, parse_scenario, read_json, run_experiment, run_seed, sweep)

SCENARIOS = Path(__file__).resolve().parents[1] / 'scenarios'

TINY = {
    'name': 'tiny',
    'kind': 'robust-bandit',
    'T': 6,
    'delta': 0.05,
    'seeds': 2,
    'seed_base': 7,
    'outcomes': ['lo', 'hi'],
    'reward': [[0.0, 1.0], [0.0, 1.0]],
    'models': [
        {'label': 'A', 'arms': [{'backend': 'halfspace', 'g': [0.0, 1.0], 'c': 0.6},
                                {'backend': 'singleton', 'point': [0.7, 0.3]}]},
        {'label': 'B', 'arms': [{'backend': 'singleton', 'point': [0.7, 0.3]},
                                {'backend': 'halfspace', 'g': [0.0, 1.0], 'c': 0.6}]},
    ],
    'true_models': ['A'],
}


@pytest.fixture
def tiny():
    return parse_scenario(TINY)


def test_zero_horizon(tiny, tmp_path):
    report = run_seed(tiny.model_copy(update={'T': 0}), 0, str(tmp_path))
    assert report.ok
    assert Path(report.csv_path).read_text() == ','.join(CSV_COLUMNS) + '\n'
    summary = read_json(report.summary_path)
    assert set(SUMMARY_KEYS) <= set(summary)
    assert summary['cum_regret'] == 0.0
    assert summary['rounds_completed'] == 0


def test_csv_layout(tiny, tmp_path):
    report = run_seed(tiny, 3, str(tmp_path))
    assert Path(report.csv_path).name == 'tiny_seed3.csv'
    assert Path(report.csv_path).read_text().splitlines()[0] == ','.join(CSV_COLUMNS)
    table = pd.read_csv(report.csv_path, keep_default_na=False)
    assert len(table) == tiny.T
    assert table['t'].tolist() == list(range(1, tiny.T + 1))
    assert set(table['outcome']) <= {'lo', 'hi'}
    assert np.allclose(np.cumsum(table['inst_regret']), table['cum_regret'], atol=1e-9)
    assert table['cum_regret'].iloc[-1] == pytest.approx(report.summary['cum_regret'], abs=1e-9)
    assert (table['surviving'] >= 1).all()


def test_reruns_are_byte_identical(tiny, tmp_path):
    first = run_seed(tiny, 5, str(tmp_path / 'a'))
    second = run_seed(tiny, 5, str(tmp_path / 'b'))
    assert Path(first.csv_path).read_bytes() == Path(second.csv_path).read_bytes()
    assert Path(first.summary_path).read_bytes() == Path(second.summary_path).read_bytes()


def test_summary_bounds_come_from_parameters(tiny, tmp_path):
    a = run_seed(tiny, 1, str(tmp_path)).summary
    b = run_seed(tiny, 2, str(tmp_path)).summary
    for key in ('beta_bound', 'alpha_bound', 'T', 'delta'):
        assert a[key] == b[key]
    assert a['beta_bound'] == pytest.approx(np.log(2 * 2 / 0.05))


def test_experiment_writes_every_seed(tiny, tmp_path):
    reports, summary = run_experiment(tiny, str(tmp_path))
    assert [r.seed for r in reports] == [7, 8]
    for r in reports:
        assert Path(r.csv_path).exists() and Path(r.summary_path).exists()
    on_disk = json.loads((tmp_path / 'tiny_aggregate.json').read_text())
    assert on_disk == summary
    assert summary['seeds'] == [7, 8]
    assert summary['errors'] == {}
    assert 0.0 <= summary['beta_violation_rate'] <= 1.0


def test_interrupted_run_keeps_completed_rounds(tiny, tmp_path, monkeypatch):
    real = harness.run_e2d

    def failing(config, problem, oracle, env, seed, true_labels):
        partial = real(config.__class__(T=2, delta=config.delta, beta_budget=config.beta_budget), problem, oracle,
                       env, seed, true_labels)
        err = SolverQualityError('market total drifted')
        err.transcript = partial
        raise err

    monkeypatch.setattr(harness, 'run_e2d', failing)
    reports, summary = run_experiment(tiny, str(tmp_path), seeds=1)
    report = reports[0]
    assert not report.ok
    assert 'SolverQualityError' in report.error
    assert len(pd.read_csv(report.csv_path, keep_default_na=False)) == 2
    assert read_json(report.summary_path)['error'] == report.error
    assert summary['errors'] == {'7': report.error}


def test_aggregate_needs_reports():
    with pytest.raises(InvalidParameterError):
        aggregate([])


def test_log_slope():
    x = np.array([100, 200, 400, 800])
    assert log_slope(x, 3.0 * np.sqrt(x)) == pytest.approx(0.5)
    assert log_slope(x, 0.1 * x) == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        log_slope(x, [1.0, 2.0, 0.0, 4.0])
    with pytest.raises(InvalidParameterError):
        log_slope(x, [-1.0, 2.0, 3.0, 4.0])


def test_sweep(tiny, tmp_path):
    result = sweep(tiny, str(tmp_path), [2, 4], seeds=1)
    assert result['horizons'] == [2, 4]
    assert len(result['cum_regret_mean']) == 2
    assert (tmp_path / 'T2' / 'tiny_seed7.csv').exists()
    assert (tmp_path / 'tiny_sweep.json').exists()
    with pytest.raises(InvalidParameterError):
        sweep(tiny, str(tmp_path), [4])


def test_sweep_without_positive_regret(tiny, tmp_path, monkeypatch):
    means = iter([0.0, 1.5])
    monkeypatch.setattr(harness, 'run_experiment',
                        lambda scenario, out_dir, **kwargs: ([], {'cum_regret_mean': next(means)}))
    result = sweep(tiny, str(tmp_path), [2, 4])
    assert result['cum_regret_mean'] == [0.0, 1.5]
    assert result['exponent'] is None
    assert read_json(str(tmp_path / 'tiny_sweep.json'))['exponent'] is None


@pytest.mark.slow
def test_three_arm_bounds_hold(tmp_path):
    scenario = load_scenario(str(SCENARIOS / 'three_arm_robust.json'))
    _, summary = run_experiment(scenario, str(tmp_path), seeds=100)
    assert summary['errors'] == {}
    assert summary['beta_violation_rate'] <= 0.05
    assert summary['alpha_violation_rate'] <= 0.05


def test_rmdp_end_to_end(tmp_path):
    scenario = load_scenario(str(SCENARIOS / 'rmdp_small.json'))
    reports, summary = run_experiment(scenario.model_copy(update={'T': 2}), str(tmp_path), seeds=1)
    assert summary['errors'] == {}
    assert reports[0].ok
    table = pd.read_csv(reports[0].csv_path, keep_default_na=False)
    assert table['t'].tolist() == [1, 2]
    assert read_json(reports[0].summary_path)['kind'] == 'rmdp'
    assert (tmp_path / 'rmdp_small_aggregate.json').is_file()


@pytest.mark.slow
@pytest.mark.parametrize('name', ['classical_bandit', 'halfspace_bandit', 'two_policy_toy'])
def test_regret_bound_holds(name, tmp_path):
    scenario = load_scenario(str(SCENARIOS / '{}.json'.format(name)))
    reports, summary = run_experiment(scenario, str(tmp_path), seeds=max(50, scenario.seeds))
    assert summary['errors'] == {}
    assert len(summary['seeds']) >= 50
    assert summary['theorem1_violation_rate'] <= 2 * scenario.delta
    for r in reports:
        if r.summary['beta_empirical'] <= r.summary['beta_budget']:
            assert r.summary['true_rejections'] == 0


@pytest.mark.slow
def test_rmdp_regret_and_loss_growth(tmp_path):
    scenario = load_scenario(str(SCENARIOS / 'rmdp_small.json'))
    horizons = [250, 500, 1000, 2000]
    result = sweep(scenario, str(tmp_path), horizons)
    assert result['exponent'] is not None
    assert result['exponent'] <= 0.75

    beta_means = []
    for T in horizons:
        run_dir = tmp_path / 'T{}'.format(T)
        summary = read_json(str(run_dir / 'rmdp_small_aggregate.json'))
        assert summary['errors'] == {}
        assert summary['beta_violation_rate'] <= 0.2
        seeds = [read_json(str(p)) for p in sorted(run_dir.glob('rmdp_small_seed*_summary.json'))]
        assert len(seeds) == scenario.seeds
        beta_means.append(np.mean([s['beta_empirical'] for s in seeds]))
        assert beta_means[-1] <= seeds[0]['beta_bound']
    # the grid term of the bound is linear in T
    assert min(beta_means) > 0
    assert log_slope(horizons, beta_means) <= 1.1
