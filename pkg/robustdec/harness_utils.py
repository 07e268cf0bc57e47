"""
Seeded experiment runs and their reports.

Each seed writes a per-round CSV and a summary JSON; run_experiment adds an
aggregate summary over seeds. A run interrupted by a package error still writes
the rounds it completed, with the error recorded in the summary.
"""

import logging
import multiprocessing as mp
from dataclasses import dataclass, field
from os.path import join
from typing import Optional

import numpy as np

from .e2d_utils import E2DConfig, E2DTranscript, run_e2d, theorem1_rhs
from .error_utils import InvalidParameterError, RobustDecError
from .file_utils import ensure_dir, write_json, write_table
from .scenario_utils import build_runtime

__all__ = ['CSV_COLUMNS', 'SUMMARY_KEYS', 'RunReport', 'transcript_rows', 'summarize', 'run_seed',
           'aggregate', 'run_experiment', 'log_slope', 'sweep']

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('t', 'action', 'outcome', 'reward', 'inst_regret', 'cum_regret', 'inacc_ledger', 'opt_ledger',
               'surviving', 'star', 'flags')
SUMMARY_KEYS = ('scenario', 'seed', 'T', 'delta', 'cum_regret', 'theorem1_rhs', 'beta_bound', 'beta_empirical',
                'alpha_bound', 'alpha_empirical', 'violations')


@dataclass
class RunReport:
    scenario: str
    seed: int
    csv_path: str
    summary_path: str
    summary: dict = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


def _empty_transcript(labels):
    zeros = {label: 0.0 for label in labels}
    return E2DTranscript(true_labels=list(labels), cum_regret=dict(zeros), cum_sampled_regret=dict(zeros))


def transcript_rows(transcript, runtime):
    """
    Per-round rows for the regret CSV, reported against the primary true label.

    cum_regret is accumulated from the same floats as inst_regret, so it is their
    prefix sum.
    """

    label = runtime.primary_label
    rows, cum = [], 0.0
    for rec, (losses, optimism) in zip(transcript.rounds, transcript.ledger_history):
        cum += rec.inst_regret[label]
        rows.append({'t': rec.t, 'action': runtime.action_label(rec.action),
                     'outcome': runtime.outcome_label(rec.outcome), 'reward': rec.reward,
                     'inst_regret': rec.inst_regret[label], 'cum_regret': cum, 'inacc_ledger': losses[label],
                     'opt_ledger': optimism, 'surviving': len(rec.surviving), 'star': rec.star,
                     'flags': ';'.join(rec.flags)})
    return rows


def summarize(runtime, seed, transcript, error=None):
    """
    Summary of one run.

    Bounds come from the scenario parameters; theorem1_rhs uses the largest realized
    DEC value and the measured optimism ledger.
    """

    scenario = runtime.scenario
    label = runtime.primary_label
    dec = float(transcript.max_dec)
    alpha_empirical = float(transcript.cum_optimism)
    summary = {
        'scenario': scenario.name,
        'seed': int(seed),
        'T': int(scenario.T),
        'delta': float(scenario.delta),
        'cum_regret': float(transcript.cum_regret.get(label, 0.0)),
        'theorem1_rhs': theorem1_rhs(scenario.T, dec, alpha_empirical, scenario.delta),
        'beta_bound': float(runtime.beta_bound),
        'beta_empirical': float(max(transcript.cum_loss.values(), default=0.0)),
        'alpha_bound': float(runtime.alpha_bound),
        'alpha_empirical': alpha_empirical,
        'violations': len(transcript.violations),
        'kind': scenario.kind,
        'estimator': scenario.estimator_name,
        'beta_budget': float(runtime.beta_budget),
        'dec_measured': dec,
        'cum_sampled_regret': float(transcript.cum_sampled_regret.get(label, 0.0)),
        'degenerate_rounds': int(transcript.degenerate_rounds),
        'true_rejections': len(transcript.true_rejections),
        'rounds_completed': len(transcript),
    }
    summary.update(runtime.extras)
    if error is not None:
        summary['error'] = error
    return summary


def _paths(out_dir, name, seed):
    stem = join(out_dir, '{}_seed{}'.format(name, seed))
    return stem + '.csv', stem + '_summary.json'


def run_seed(scenario, seed, out_dir, runtime=None):
    """
    Run one seed of a scenario and write its CSV and summary.

    Inputs:
        scenario - Scenario.
        seed - Run seed.
        out_dir - Output directory (created if missing).
        runtime - Prebuilt ScenarioRuntime. If None, one is built. (Default: None)
    Outputs:
        report - RunReport; report.error is set when the run was interrupted.
    """

    runtime = runtime if runtime is not None else build_runtime(scenario)
    ensure_dir(out_dir)
    csv_path, summary_path = _paths(out_dir, scenario.name, seed)
    error = None
    if scenario.T == 0:
        transcript = _empty_transcript(runtime.true_labels)
    else:
        config = E2DConfig(T=scenario.T, delta=scenario.delta, beta_budget=runtime.beta_budget)
        try:
            transcript = run_e2d(config, runtime.problem, runtime.oracle(seed), runtime.environment(seed), seed,
                                 runtime.true_labels)
        except RobustDecError as err:
            transcript = getattr(err, 'transcript', None)
            if transcript is None:
                transcript = _empty_transcript(runtime.true_labels)
            error = '{}: {}'.format(type(err).__name__, err)
            logger.error('%s seed %d stopped after %d rounds: %s', scenario.name, seed, len(transcript), error)

    write_table(csv_path, transcript_rows(transcript, runtime), CSV_COLUMNS)
    summary = summarize(runtime, seed, transcript, error=error)
    write_json(summary_path, summary)
    logger.info('%s seed %d done: cumulative regret %.6g', scenario.name, seed, summary['cum_regret'])
    return RunReport(scenario.name, int(seed), csv_path, summary_path, summary=summary, error=error)


def aggregate(reports):
    """Across-seed summary: regret statistics and bound violation rates."""
    if not reports:
        raise InvalidParameterError('nothing to aggregate')
    summaries = [r.summary for r in reports]
    regrets = np.asarray([s['cum_regret'] for s in summaries])
    n = len(summaries)
    return {
        'scenario': reports[0].scenario,
        'seeds': [r.seed for r in reports],
        'T': summaries[0]['T'],
        'delta': summaries[0]['delta'],
        'cum_regret_mean': float(regrets.mean()),
        'cum_regret_median': float(np.median(regrets)),
        'cum_regret_max': float(regrets.max()),
        'beta_violation_rate': sum(s['beta_empirical'] > s['beta_bound'] for s in summaries) / n,
        'alpha_violation_rate': sum(s['alpha_empirical'] > s['alpha_bound'] for s in summaries) / n,
        'theorem1_violation_rate': sum(s['cum_regret'] > s['theorem1_rhs'] for s in summaries) / n,
        'violations': int(sum(s['violations'] for s in summaries)),
        'errors': {str(r.seed): r.error for r in reports if r.error is not None},
    }


def _run_seed_job(scenario, seed, out_dir):
    return run_seed(scenario, seed, out_dir)


def run_experiment(scenario, out_dir, seeds=None, seed_base=None, workers=1):
    """
    Run every seed of a scenario and write the aggregate summary.

    Inputs:
        scenario - Scenario.
        out_dir - Output directory.
        seeds - Number of seeds. If None, scenario.seeds. (Default: None)
        seed_base - First seed. If None, scenario.seed_base. (Default: None)
        workers - Worker processes; 1 runs in this process. (Default: 1)
    Outputs:
        reports - List of RunReport in seed order.
        summary - Aggregate summary dict (also written to <name>_aggregate.json).
    """

    seeds = scenario.seeds if seeds is None else int(seeds)
    seed_base = scenario.seed_base if seed_base is None else int(seed_base)
    if seeds < 1 or workers < 1:
        raise InvalidParameterError('need at least one seed and one worker')
    runtime = build_runtime(scenario)
    ensure_dir(out_dir)
    seed_list = list(range(seed_base, seed_base + seeds))
    logger.info('running %s: %d seeds from %d on %d worker(s)', scenario.name, seeds, seed_base, workers)

    if workers == 1 or seeds == 1:
        reports = [run_seed(scenario, seed, out_dir, runtime=runtime) for seed in seed_list]
    else:
        with mp.get_context('spawn').Pool(processes=min(workers, seeds)) as pool:
            reports = pool.starmap(_run_seed_job, [(scenario, seed, out_dir) for seed in seed_list])

    summary = aggregate(reports)
    write_json(join(out_dir, '{}_aggregate.json'.format(scenario.name)), summary)
    return reports, summary


def log_slope(x, y):
    """Slope of the least-squares line through (log x, log y); x and y must be positive."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidParameterError('a power-law fit needs positive values, got x={} y={}'.format(
            x.tolist(), y.tolist()))
    a, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(a)


def sweep(scenario, out_dir, horizons, seeds=None, seed_base=None, workers=1):
    """
    Run a scenario at several horizons and fit the regret growth exponent.

    Inputs:
        scenario - Scenario (its T is replaced by each horizon).
        out_dir - Output directory; horizon h writes under <out_dir>/T<h>.
        horizons - Increasing positive horizons (at least two).
        seeds, seed_base, workers - As in run_experiment.
    Outputs:
        result - Dict with horizons, mean cumulative regret per horizon and the
            fitted exponent (None unless every mean is positive); also written to
            <name>_sweep.json.
    """

    horizons = [int(T) for T in horizons]
    if len(horizons) < 2 or any(T < 1 for T in horizons):
        raise InvalidParameterError('a sweep needs at least two positive horizons, got {}'.format(horizons))
    means = []
    for T in horizons:
        _, summary = run_experiment(scenario.model_copy(update={'T': T}), join(out_dir, 'T{}'.format(T)),
                                    seeds=seeds, seed_base=seed_base, workers=workers)
        means.append(summary['cum_regret_mean'])
    if min(means) > 0:
        exponent = log_slope(horizons, means)
        logger.info('%s sweep exponent %.3f', scenario.name, exponent)
    else:
        exponent = None
        logger.warning('%s sweep: mean regret %s is not positive at every horizon; no exponent fitted',
                       scenario.name, means)
    result = {'scenario': scenario.name, 'horizons': horizons, 'cum_regret_mean': means,
              'exponent': exponent}
    write_json(join(ensure_dir(out_dir), '{}_sweep.json'.format(scenario.name)), result)
    return result
