import copy
import json
from pathlib import Path

import pytest

from robustdec import (Fattened, FullSimplex, Halfspace, Scenario, ScenarioValidationError, build_belief,
                       build_runtime, load_scenario, parse_belief, parse_scenario, validate_scenario)

SCENARIOS = Path(__file__).resolve().parents[1] / 'scenarios'

BANDIT = {
    'name': 'tiny',
    'kind': 'robust-bandit',
    'T': 5,
    'delta': 0.05,
    'seeds': 2,
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


def _edit(**changes):
    payload = copy.deepcopy(BANDIT)
    payload.update(changes)
    return payload


def _locations(payload):
    with pytest.raises(ScenarioValidationError) as info:
        build_runtime(parse_scenario(payload))
    return [loc for loc, _ in info.value.fields]


class TestParsing:
    def test_defaults(self):
        scenario = parse_scenario(BANDIT)
        assert isinstance(scenario, Scenario)
        assert scenario.estimator_name == 'rue'
        assert scenario.env_mode == 'worst-case-stationary'
        assert scenario.seed_base == 0

    def test_every_bad_field_is_listed(self):
        payload = _edit(T=-1, delta=1.5, colour='blue')
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(payload)
        locations = [loc for loc, _ in info.value.fields]
        assert {'T', 'delta', 'colour'} <= set(locations)
        assert 'T' in str(info.value)

    def test_unknown_backend(self):
        payload = _edit()
        payload['models'][0]['arms'][0] = {'backend': 'ellipsoid'}
        with pytest.raises(ScenarioValidationError) as info:
            parse_scenario(payload)
        assert info.value.fields[0][0].startswith('models.0.arms.0')

    @pytest.mark.parametrize('changes', [
        {'true_models': ['C']},
        {'true_models': []},
        {'reward': None},
        {'estimator': {'name': 'covering'}},
        {'environment': {'model': 'B'}},
    ])
    def test_cross_field_checks(self, changes):
        with pytest.raises(ScenarioValidationError):
            parse_scenario(_edit(**changes))

    def test_duplicate_labels(self):
        payload = _edit()
        payload['models'][1]['label'] = 'A'
        with pytest.raises(ScenarioValidationError):
            parse_scenario(payload)

    def test_kernel_needs_one_description(self):
        payload = json.loads((SCENARIOS / 'rmdp_small.json').read_text())
        payload['rmdp']['hypotheses'][0]['cells'] = []
        with pytest.raises(ScenarioValidationError):
            parse_scenario(payload)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"name": ')
        with pytest.raises(ScenarioValidationError) as info:
            load_scenario(str(path))
        assert info.value.fields[0][0] == '<document>'


class TestBeliefs:
    def test_backends(self, coin):
        assert isinstance(build_belief(parse_belief({'backend': 'full'}), coin), FullSimplex)
        hs = build_belief(parse_belief({'backend': 'halfspace', 'g': [0.0, 1.0], 'c': 0.4}), coin)
        assert isinstance(hs, Halfspace)
        fat = build_belief(parse_belief({'backend': 'fattened', 'radius': 0.1,
                                         'base': {'backend': 'singleton', 'point': [0.5, 0.5]}}), coin)
        assert isinstance(fat, Fattened)

    def test_fattening_radius_range(self):
        with pytest.raises(ScenarioValidationError):
            parse_belief({'backend': 'fattened', 'radius': 2.0, 'base': {'backend': 'full'}})


class TestRuntime:
    def test_bandit(self):
        runtime = build_runtime(parse_scenario(BANDIT))
        assert runtime.problem.labels == ['A', 'B']
        assert runtime.primary_label == 'A'
        assert runtime.beta_budget == pytest.approx(runtime.beta_bound)
        assert runtime.outcome_label(1) == 'hi'
        assert runtime.oracle(0).name == 'rue'

    def test_empty_belief(self):
        payload = _edit()
        payload['models'][0]['arms'][0] = {'backend': 'halfspace', 'g': [0.0, 1.0], 'c': 1.5}
        assert _locations(payload) == ['robust-bandit']

    def test_reward_rows_must_match_actions(self):
        assert _locations(_edit(reward=[[0.0, 1.0]])) == ['reward']

    def test_script_outside_the_model(self):
        env = {'mode': 'scripted', 'script': [[[0.2, 0.8], [0.7, 0.3]], [[0.5, 0.5], [0.7, 0.3]]]}
        assert _locations(_edit(environment=env)) == ['environment.script.1.0']

    def test_unknown_mode(self):
        assert _locations(_edit(environment={'mode': 'greedy'})) == ['robust-bandit']

    def test_true_point_outside_box(self):
        payload = json.loads((SCENARIOS / 'linbandit_cover.json').read_text())
        payload['linear']['lower'] = [0.5]
        assert _locations(payload) == ['linear.true_point']

    def test_linear_bandit(self):
        runtime = build_runtime(load_scenario(str(SCENARIOS / 'linbandit_cover.json')))
        assert runtime.extras['cover_size'] == 5
        assert runtime.true_labels == ['truth']
        assert len(runtime.problem.labels) == 6
        assert runtime.oracle(0).name == 'covering'

    def test_rmdp(self):
        runtime = build_runtime(load_scenario(str(SCENARIOS / 'rmdp_small.json')))
        assert len(runtime.policies) == 16
        assert runtime.problem.labels == ['stay', 'switch']
        assert runtime.extras['rmdp_reference_bound'] > 0
        assert runtime.oracle(0).name == 'rmdp-market'

    @pytest.mark.parametrize('name', sorted(p.name for p in SCENARIOS.glob('*.json')))
    def test_shipped_scenarios_validate(self, name):
        assert validate_scenario(str(SCENARIOS / name)).name == name[:-len('.json')]
