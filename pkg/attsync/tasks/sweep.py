"""
Batch check of the invariance, monotonicity and settling-time properties over seeded random initial
conditions. Every agent starts at random(max_norm); trial k draws from the splitmix64 stream of
(seed, k), so a sweep is reproducible and independent of --workers.

Writes trials.csv (one row per trial, in trial order) and summary.json.

"""

import argparse
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np
import pandas

from attsync.analysis import check_monotone, classify_convergence, rate_constants
from attsync.controllers import validate_guarantees
from attsync.errors import InsufficientHorizon, InvalidConfig, OutOfDomain
from attsync.results import write_frame, write_json
from attsync.simulation import simulate
from attsync.tasks.utils import EXIT_CAVEAT, EXIT_OK, SETTLING_SLACK, add_output_argument, \
    add_scenario_arguments, dumps, output_dir, resolve_scenario

logger = logging.getLogger(__name__)

INVARIANCE_TOL = 1e-6
LABELS = ('finite_time', 'asymptotic', 'none')


def add_arguments(parser):
    add_scenario_arguments(parser)
    add_output_argument(parser)
    parser.add_argument("--trials", default=100, nargs='?', type=int)
    parser.add_argument("--max-norm", dest='max_norm', default=0.9 * np.pi, nargs='?', type=float)
    parser.add_argument("--workers", default=1, nargs='?', type=int)


def parse_args():  # pragma: no cover
    parser = argparse.ArgumentParser()
    add_arguments(parser)
    return parser.parse_args()


def check_bounds(scenario, trials, max_norm):
    if trials < 1:
        raise InvalidConfig('--trials must be at least 1, got {}'.format(trials))
    if scenario.protocol == 1 and not 0 < max_norm < np.pi:
        raise InvalidConfig('protocol 1 sweeps need 0 < max_norm < pi, got {!r}'.format(max_norm))
    if scenario.protocol == 2 and not (max_norm > 0 and scenario.n * max_norm ** 2 < np.pi ** 2):
        raise InvalidConfig('protocol 2 sweeps need n * max_norm^2 < pi^2, got n={} and max_norm={!r}'
                            .format(scenario.n, max_norm))


def run_trial(args):
    scenario, trial, max_norm = args
    cfg = scenario.protocol_config()
    icfg = scenario.integrator_config()
    if icfg.stop_tolerance is None:
        icfg = replace(icfg, stop_tolerance=scenario.tolerance)

    x0 = scenario.initial_state(trial=trial, max_norm=max_norm)
    result = simulate(x0, cfg, icfg)
    ch = result.channels
    row = {'trial': trial, 'status': result.status, 'initial_max_norm': ch['max_norm'][0],
           'final_disagreement': ch['disagreement'][-1]}

    try:
        convergence = classify_convergence(result, scenario.tolerance)
        row.update({'label': convergence.label, 'T_c': convergence.T_c})
    except InsufficientHorizon:
        row.update({'label': 'none', 'T_c': None})

    if cfg.protocol == 1:
        row['invariance'] = bool(np.max(ch['max_norm']) <= ch['max_norm'][0] + INVARIANCE_TOL)
        row['monotone'] = check_monotone(ch['V1'], INVARIANCE_TOL)
        try:
            bound = rate_constants(x0, cfg.topology).settling_bound
        except OutOfDomain:
            bound = None
        row['settling_bound'] = bound
        row['settling_bound_met'] = None if (bound is None or row['T_c'] is None) \
            else bool(row['T_c'] <= SETTLING_SLACK * bound)
    else:
        row['invariance'] = bool(np.max(ch['V3']) <= ch['V3'][0] + INVARIANCE_TOL)
        row['monotone'] = check_monotone(ch['V3'], INVARIANCE_TOL)
        row['settling_bound'] = None
        row['settling_bound_met'] = None
    logger.info('trial {}: {} (T_c={}), invariance {}, monotone {}'.format(trial, row['label'], row['T_c'],
                                                                          row['invariance'], row['monotone']))
    return row


def summarize(rows, max_norm):
    df = pandas.DataFrame(rows)
    met = df['settling_bound_met'].dropna()
    summary = {'trials': len(df),
               'max_norm': max_norm,
               'invariance': float(df['invariance'].mean()),
               'monotone': float(df['monotone'].mean()),
               'settling_bound': float(met.astype(bool).mean()) if len(met) else None,
               'labels': {k: int((df['label'] == k).sum()) for k in LABELS},
               'out_of_domain': int((df['status'] == 'out_of_domain').sum())}
    summary['finite_time'] = summary['labels']['finite_time'] / summary['trials']
    return df, summary


def run(ARGS, scenario=None, is_test=False):
    scenario = scenario or resolve_scenario(ARGS)
    check_bounds(scenario, ARGS.trials, ARGS.max_norm)
    validate_guarantees(scenario.protocol_config())
    out = output_dir(ARGS, scenario)
    workers = max(1, getattr(ARGS, 'workers', 1) or 1)
    logger.info('sweeping {}: {} trials at max_norm {:.6g} on {} worker(s)'.format(scenario.name, ARGS.trials,
                                                                                  ARGS.max_norm, workers))

    jobs = [(scenario, k, ARGS.max_norm) for k in range(ARGS.trials)]
    if workers == 1:
        rows = list(map(run_trial, jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_trial, jobs))

    df, summary = summarize(rows, ARGS.max_norm)
    summary['scenario'] = scenario.name
    write_frame(df, os.path.join(out, 'trials.csv'))
    write_json(summary, os.path.join(out, 'summary.json'))

    ok = summary['invariance'] == 1. and summary['monotone'] == 1. and summary['finite_time'] == 1.
    res = {'summary': summary, 'trials': df, 'exit_code': EXIT_OK if ok else EXIT_CAVEAT}
    if not is_test:  # pragma: no cover
        print(dumps(summary))
    return res


if __name__ == '__main__':  # pragma: no cover
    raise SystemExit(run(parse_args())['exit_code'])
