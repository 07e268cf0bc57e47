"""
Command line entry point: robustdec {run, validate, sweep, oracle}.
"""

import argparse
import json
import logging
import sys

import numpy as np

from .belief_utils import hellinger_project
from .error_utils import RobustDecError, ScenarioValidationError
from .file_utils import list_scenarios, read_json
from .harness_utils import run_experiment, sweep
from .log_utils import configure_logging
from .numpy_utils import make_rng
from .oracle_utils import (frequency_zscores, grid_fuzzy_dec, grid_offset_dec, grid_projection,
                           trajectory_frequencies)
from .prob_utils import OutcomeSpace
from .rmdp_utils import traj_dist, worst_case_selection
from .scenario_utils import build_belief, build_runtime, load_scenario, parse_belief

__all__ = ['EXIT_OK', 'EXIT_RUN_FAILED', 'EXIT_INVALID', 'build_argument_parser', 'main']

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_INVALID = 2


def _add_seed_options(parser):
    parser.add_argument('--seeds', type=int, default=None, help='Number of seeds (default: from the scenario).')
    parser.add_argument('--seed-base', type=int, default=None, help='First seed (default: from the scenario).')
    parser.add_argument('--workers', type=int, default=1, help='Worker processes for seeds (default: 1).')


def build_argument_parser():
    parser = argparse.ArgumentParser(prog='robustdec',
                                     description='Decision making with robust models: experiments and oracles.')
    parser.add_argument('--log-level', default='WARNING', help='Logging level (default: WARNING).')
    commands = parser.add_subparsers(dest='command', required=True)

    run = commands.add_parser('run', help='Run every seed of a scenario and write reports.')
    run.add_argument('--scenario', required=True, help='Scenario JSON file, or a directory of them.')
    run.add_argument('--out', required=True, help='Output directory.')
    _add_seed_options(run)

    validate = commands.add_parser('validate', help='Validate and build a scenario without running it.')
    validate.add_argument('--scenario', required=True, help='Scenario JSON file, or a directory of them.')

    sweep_cmd = commands.add_parser('sweep', help='Run a scenario at several horizons and fit the regret exponent.')
    sweep_cmd.add_argument('--scenario', required=True, help='Scenario JSON file.')
    sweep_cmd.add_argument('--out', required=True, help='Output directory.')
    sweep_cmd.add_argument('--horizons', type=int, nargs='+', required=True, help='Horizons T to run.')
    _add_seed_options(sweep_cmd)

    oracle = commands.add_parser('oracle', help='Brute-force reference computations.')
    oracles = oracle.add_subparsers(dest='oracle', required=True)

    offset = oracles.add_parser('offset-dec', help='Offset DEC by grid search over action distributions.')
    offset.add_argument('--tables', required=True, help='JSON file with maxf, fbar and L.')
    offset.add_argument('--gamma', type=float, required=True, help='Offset weight.')
    offset.add_argument('--step', type=float, default=1e-3, help='Grid step (default: 1e-3).')

    fuzzy = oracles.add_parser('fuzzy-dec', help='Fuzzy DEC by grid search over actions and sub-distributions.')
    fuzzy.add_argument('--tables', required=True, help='JSON file with maxf, fbar and L.')
    fuzzy.add_argument('--eps', type=float, required=True, help='Radius eps.')
    fuzzy.add_argument('--step', type=float, default=0.02, help='Grid step (default: 0.02).')

    projection = oracles.add_parser('projection', help='Hellinger projection by grid search over members.')
    projection.add_argument('--belief', required=True, help='JSON file with one belief spec.')
    projection.add_argument('--target', type=float, nargs='+', required=True, help='Target probabilities.')
    projection.add_argument('--step', type=float, default=1e-3, help='Grid step (default: 1e-3).')

    mc = oracles.add_parser('trajectory-mc', help='Rollout frequencies against the exact trajectory distribution.')
    mc.add_argument('--scenario', required=True, help='rmdp scenario JSON file.')
    mc.add_argument('--policy', type=int, default=0, help='Policy index (default: 0).')
    mc.add_argument('--samples', type=int, default=100000, help='Number of rollouts (default: 100000).')
    mc.add_argument('--seed', type=int, default=0, help='Seed of the rollout stream (default: 0).')
    return parser


def _emit(payload):
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write('\n')


def _scenario_paths(loc):
    paths = list_scenarios(loc)
    if not paths:
        raise ScenarioValidationError([('scenario', 'no scenario documents under {}'.format(loc))])
    return paths


def _emit_by_name(results):
    """One scenario prints its payload; a directory prints a dict keyed by scenario name."""
    _emit(next(iter(results.values())) if len(results) == 1 else results)


def _run(args):
    results, failed = {}, []
    for path in _scenario_paths(args.scenario):
        scenario = load_scenario(path)
        reports, summary = run_experiment(scenario, args.out, seeds=args.seeds, seed_base=args.seed_base,
                                          workers=args.workers)
        results[scenario.name] = summary
        failed.extend(r for r in reports if not r.ok)
    _emit_by_name(results)
    for r in failed:
        logger.error('%s seed %d: %s', r.scenario, r.seed, r.error)
    return EXIT_RUN_FAILED if failed else EXIT_OK


def _validate(args):
    paths = _scenario_paths(args.scenario)
    results, invalid = {}, 0
    for path in paths:
        try:
            scenario = load_scenario(path)
            runtime = build_runtime(scenario)
        except ScenarioValidationError as err:
            if len(paths) == 1:
                raise
            sys.stderr.write('{}: {}\n'.format(path, err))
            invalid += 1
            continue
        results[scenario.name] = {'scenario': scenario.name, 'kind': scenario.kind,
                                  'hypotheses': len(runtime.problem.labels), 'actions': runtime.problem.n_actions,
                                  'beta_bound': runtime.beta_bound, 'alpha_bound': runtime.alpha_bound, 'valid': True}
        logger.info('%s is valid', path)
    if results:
        _emit_by_name(results)
    return EXIT_INVALID if invalid else EXIT_OK


def _sweep(args):
    scenario = load_scenario(args.scenario)
    _emit(sweep(scenario, args.out, args.horizons, seeds=args.seeds, seed_base=args.seed_base,
                workers=args.workers))
    return EXIT_OK


def _oracle(args):
    if args.oracle in ('offset-dec', 'fuzzy-dec'):
        tables = read_json(args.tables)
        if args.oracle == 'offset-dec':
            value, p = grid_offset_dec(tables['maxf'], tables['fbar'], tables['L'], args.gamma, step=args.step)
            _emit({'value': value, 'p': p.tolist()})
        else:
            value, p, adversary = grid_fuzzy_dec(tables['maxf'], tables['fbar'], tables['L'], args.eps,
                                                 step=args.step, return_adversary=True)
            _emit({'value': value, 'p': p.tolist(), 'adversary': adversary.mass.tolist()})
    elif args.oracle == 'projection':
        target = np.asarray(args.target, dtype=float)
        belief = build_belief(parse_belief(read_json(args.belief)), OutcomeSpace.of_size(len(target)))
        point, d2 = grid_projection(target, belief, step=args.step)
        exact, exact_d2 = hellinger_project(target, belief)
        _emit({'point': point.tolist(), 'dist_sq': d2, 'solver_point': exact.probs.tolist(),
               'solver_dist_sq': exact_d2})
    else:
        runtime = build_runtime(load_scenario(args.scenario))
        if runtime.kind != 'rmdp':
            raise ScenarioValidationError([('kind', "trajectory-mc needs an 'rmdp' scenario")])
        pi = runtime.policies[args.policy]
        selection = worst_case_selection(runtime.true_kernel, pi)
        freq = trajectory_frequencies(selection, pi, make_rng(args.seed, 'samples'), args.samples)
        exact = traj_dist(selection, pi)
        scores = frequency_zscores(exact, freq, args.samples)
        _emit({'samples': args.samples, 'trajectories': len(exact), 'max_zscore': max(scores.values()),
               'exact': {'-'.join(map(str, k)): v for k, v in sorted(exact.items())},
               'empirical': {'-'.join(map(str, k)): v for k, v in sorted(freq.items())}})
    return EXIT_OK


COMMANDS = {'run': _run, 'validate': _validate, 'sweep': _sweep, 'oracle': _oracle}


def main(argv=None):
    """Parse arguments, dispatch, and return the process exit status."""
    args = build_argument_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ScenarioValidationError as err:
        sys.stderr.write('{}\n'.format(err))
        return EXIT_INVALID
    except OSError as err:
        sys.stderr.write('cannot read input: {}\n'.format(err))
        return EXIT_INVALID
    except RobustDecError as err:
        sys.stderr.write('error: {}\n'.format(err))
        return EXIT_RUN_FAILED


if __name__ == '__main__':
    sys.exit(main())
