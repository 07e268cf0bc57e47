import json
from pathlib import Path

import pytest

import robustdec.harness_utils as harness
from robustdec import SolverQualityError
from robustdec.cli import EXIT_INVALID, EXIT_OK, EXIT_RUN_FAILED, build_argument_parser, main

SCENARIOS = Path(__file__).resolve().parents[1] / 'scenarios'

TINY = {
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


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _stdout(capsys):
    return json.loads(capsys.readouterr().out)


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_argument_parser().parse_args([])


def test_validate(capsys):
    assert main(['validate', '--scenario', str(SCENARIOS / 'two_policy_toy.json')]) == EXIT_OK
    out = _stdout(capsys)
    assert out['valid'] is True
    assert out['scenario'] == 'two_policy_toy'


def test_invalid_scenario(tmp_path, capsys):
    path = _write(tmp_path, 'bad.json', dict(TINY, delta=1.5))
    assert main(['validate', '--scenario', path]) == EXIT_INVALID
    assert 'delta' in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(['validate', '--scenario', str(tmp_path / 'absent.json')]) == EXIT_INVALID
    assert 'cannot read input' in capsys.readouterr().err


def test_run_writes_reports(tmp_path, capsys):
    path = _write(tmp_path, 'tiny.json', TINY)
    out_dir = tmp_path / 'out'
    assert main(['run', '--scenario', path, '--out', str(out_dir), '--seeds', '1', '--seed-base', '4']) == EXIT_OK
    summary = _stdout(capsys)
    assert summary['seeds'] == [4]
    assert summary['errors'] == {}
    assert (out_dir / 'tiny_seed4.csv').is_file()
    assert (out_dir / 'tiny_seed4_summary.json').is_file()
    assert (out_dir / 'tiny_aggregate.json').is_file()


def test_validate_directory(capsys):
    assert main(['validate', '--scenario', str(SCENARIOS)]) == EXIT_OK
    out = _stdout(capsys)
    assert set(out) == {p.stem for p in SCENARIOS.glob('*.json')}
    assert all(entry['valid'] for entry in out.values())


def test_validate_directory_reports_each_invalid_file(tmp_path, capsys):
    _write(tmp_path, 'a_tiny.json', TINY)
    _write(tmp_path, 'b_bad.json', dict(TINY, name='bad', delta=1.5))
    assert main(['validate', '--scenario', str(tmp_path)]) == EXIT_INVALID
    captured = capsys.readouterr()
    assert json.loads(captured.out)['scenario'] == 'tiny'
    assert 'b_bad.json' in captured.err


def test_empty_directory(tmp_path, capsys):
    assert main(['validate', '--scenario', str(tmp_path)]) == EXIT_INVALID
    assert 'no scenario documents' in capsys.readouterr().err


def test_run_directory(tmp_path, capsys):
    scenarios = tmp_path / 'scenarios'
    scenarios.mkdir()
    _write(scenarios, 'tiny.json', TINY)
    _write(scenarios, 'tiny2.json', dict(TINY, name='tiny2'))
    out_dir = tmp_path / 'out'
    assert main(['run', '--scenario', str(scenarios), '--out', str(out_dir), '--seeds', '1']) == EXIT_OK
    out = _stdout(capsys)
    assert set(out) == {'tiny', 'tiny2'}
    assert out['tiny2']['seeds'] == [0]
    assert (out_dir / 'tiny_aggregate.json').is_file()
    assert (out_dir / 'tiny2_aggregate.json').is_file()


def test_run_failure_exit_status(tmp_path, capsys, monkeypatch):
    def failing(*args, **kwargs):
        raise SolverQualityError('no convergence')

    monkeypatch.setattr(harness, 'run_e2d', failing)
    path = _write(tmp_path, 'tiny.json', TINY)
    assert main(['run', '--scenario', path, '--out', str(tmp_path / 'out'), '--seeds', '1']) == EXIT_RUN_FAILED
    assert '0' in _stdout(capsys)['errors']


def test_oracle_offset_dec(tmp_path, capsys):
    tables = _write(tmp_path, 'tables.json', {'maxf': [0.6, 0.6], 'fbar': [0.5, 0.5], 'L': [[0.0, 0.2], [0.2, 0.0]]})
    assert main(['oracle', 'offset-dec', '--tables', tables, '--gamma', '1.0']) == EXIT_OK
    out = _stdout(capsys)
    assert out['value'] == pytest.approx(0.0, abs=1e-9)
    assert out['p'] == pytest.approx([0.5, 0.5])


def test_oracle_fuzzy_dec(tmp_path, capsys):
    tables = _write(tmp_path, 'tables.json', {'maxf': [0.6, 0.6], 'fbar': [0.5, 0.5], 'L': [[0.0, 0.2], [0.2, 0.0]]})
    assert main(['oracle', 'fuzzy-dec', '--tables', tables, '--eps', str(0.02 ** 0.5)]) == EXIT_OK
    out = _stdout(capsys)
    assert len(out['adversary']) == 2
    assert sum(out['adversary']) <= 1.0 + 1e-9
    assert out['value'] == pytest.approx(0.1 * sum(out['adversary']), abs=1e-9)


def test_oracle_projection(tmp_path, capsys):
    belief = _write(tmp_path, 'belief.json', {'backend': 'halfspace', 'g': [1.0, 0.0], 'c': 0.6})
    assert main(['oracle', 'projection', '--belief', belief, '--target', '0.2', '0.8']) == EXIT_OK
    out = _stdout(capsys)
    assert out['point'] == pytest.approx([0.6, 0.4], abs=1e-9)
    assert out['solver_dist_sq'] == pytest.approx(out['dist_sq'], abs=1e-6)


def test_trajectory_mc_needs_rmdp(capsys):
    code = main(['oracle', 'trajectory-mc', '--scenario', str(SCENARIOS / 'two_policy_toy.json'), '--samples', '10'])
    assert code == EXIT_INVALID
    assert 'rmdp' in capsys.readouterr().err
