"""
Simulates one scenario and writes

    trajectory.csv     t,agent,x1,x2,x3,norm
    diagnostics.csv    t,V1,V2,V3,disagreement,max_norm
    diagnostics.json   convergence label, rate constants, settling bound, events
    guarantees.json    the guarantee report
    scenario.json      the scenario as run

Scenarios with an "analytic" block are not integrated: the closed-form sliding solution is sampled
and every sample is certified against the Filippov inclusion.

"""

import argparse
import logging
import os

import numpy as np

from attsync.analysis import check_monotone, classify_convergence, lyapunov_channels, rate_constants
from attsync.controllers import validate_guarantees
from attsync.errors import InsufficientHorizon, OutOfDomain
from attsync.filippov import filippov_residual, sliding_consensus_trajectory, sliding_consensus_velocity, \
    sliding_crossing_time
from attsync.results import diagnostics_frame, trajectory_frame, write_frame, write_json
from attsync.simulation import simulate
from attsync.tasks.utils import EXIT_CAVEAT, EXIT_DOMAIN, EXIT_OK, SETTLING_SLACK, add_output_argument, \
    add_scenario_arguments, dumps, output_dir, resolve_scenario

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-12


def add_arguments(parser):
    add_scenario_arguments(parser)
    add_output_argument(parser)


def parse_args():  # pragma: no cover
    parser = argparse.ArgumentParser()
    add_arguments(parser)
    return parser.parse_args()


def _write_artifacts(out, scenario, report, times, states, channels, diagnostics):
    paths = {'trajectory': os.path.join(out, 'trajectory.csv'),
             'channels': os.path.join(out, 'diagnostics.csv'),
             'diagnostics': os.path.join(out, 'diagnostics.json'),
             'guarantees': os.path.join(out, 'guarantees.json'),
             'scenario': os.path.join(out, 'scenario.json')}
    write_frame(trajectory_frame(times, states), paths['trajectory'])
    write_frame(diagnostics_frame(times, channels), paths['channels'])
    write_json(diagnostics, paths['diagnostics'])
    write_json(report.as_dict(), paths['guarantees'])
    write_json(scenario.to_dict(), paths['scenario'])
    return paths


def run_analytic(scenario, cfg):
    """
    Samples the sliding consensus on [t0, t_max] and certifies each sample
    """
    spec = scenario.analytic
    times = np.linspace(spec.t0, spec.t0 + scenario.integrator.t_max, spec.samples)
    nu = sliding_consensus_velocity(spec.xbar, spec.eps1, n=cfg.n)
    states, residuals = [], []
    channels = {k: [] for k in ('V1', 'V2', 'V3', 'disagreement', 'max_norm')}
    for t in times:
        x = sliding_consensus_trajectory(spec.xbar, spec.eps1, spec.t0, t, n=cfg.n).x
        residuals.append(filippov_residual(x, nu, cfg, tol=MEMBERSHIP_TOL))
        states.append(x)
        ch = lyapunov_channels(x, cfg.topology)._asdict()
        for k in ('V1', 'V2', 'V3', 'disagreement'):
            channels[k].append(ch[k])
        channels['max_norm'].append(float(np.max(np.linalg.norm(x.reshape(cfg.n, 3), axis=1))))

    crossing = sliding_crossing_time(spec.xbar, spec.eps1, spec.t0)
    above = np.flatnonzero(np.array(channels['max_norm']) >= np.pi)
    passed = bool(max(residuals) <= MEMBERSHIP_TOL)
    logger.info('sliding solution: membership {}, max residual {:.3e}, pi crossing at t={:.6g}'
                .format('passed' if passed else 'FAILED', max(residuals), crossing))
    diagnostics = {'kind': 'sliding',
                   'membership_pass': passed,
                   'max_residual': max(residuals),
                   'membership_tolerance': MEMBERSHIP_TOL,
                   'pi_crossing_time': crossing,
                   'first_sample_above_pi': float(times[above[0]]) if len(above) else None,
                   'events': [[crossing, 'pi_crossing']] if times[0] <= crossing <= times[-1] else [],
                   'status': 'completed'}
    return times, np.array(states), channels, diagnostics, EXIT_OK if passed else EXIT_CAVEAT


def run_simulation(scenario, cfg, report):
    x0 = scenario.initial_state()
    result = simulate(x0, cfg, scenario.integrator_config())

    try:
        convergence = classify_convergence(result, scenario.tolerance).as_dict()
    except InsufficientHorizon as e:
        logger.info('not classified: {}'.format(e))
        convergence = None

    rates = None
    if cfg.protocol == 1:
        try:
            rates = rate_constants(x0, cfg.topology).as_dict()
        except OutOfDomain as e:
            logger.info('no rate constants: {}'.format(e))

    bound_met = None
    if rates is not None and convergence is not None and convergence['label'] == 'finite_time':
        bound_met = convergence['T_c'] <= SETTLING_SLACK * rates['settling_bound']

    channels = result.channels
    if cfg.protocol == 1:
        monotone = {'V1': check_monotone(channels['V1'])}
    else:
        monotone = {'V3': check_monotone(channels['V3'])}

    diagnostics = {'kind': 'simulation',
                   'classification': convergence,
                   'rate_constants': rates,
                   'settling_bound': rates['settling_bound'] if rates else None,
                   'settling_bound_slack': SETTLING_SLACK,
                   'settling_bound_met': bound_met,
                   'monotone': monotone,
                   'events': [[t, k] for t, k in result.events],
                   'status': result.status,
                   'message': result.message,
                   't_max': result.t_max}

    if result.status == 'out_of_domain':
        code = EXIT_DOMAIN
    elif report.finite_time and convergence is not None and convergence['label'] == 'finite_time' \
            and bound_met is not False:
        code = EXIT_OK
    else:
        code = EXIT_CAVEAT
    return result.times, result.states, channels, diagnostics, code


def run(ARGS, scenario=None, is_test=False):
    scenario = scenario or resolve_scenario(ARGS)
    cfg = scenario.protocol_config()
    report = validate_guarantees(cfg)
    out = output_dir(ARGS, scenario)
    logger.info('running {} into {}'.format(scenario.name, out))

    if scenario.analytic is not None:
        times, states, channels, diagnostics, code = run_analytic(scenario, cfg)
    else:
        times, states, channels, diagnostics, code = run_simulation(scenario, cfg, report)
    diagnostics.update({'scenario': scenario.name, 'exit_code': code})

    res = {'scenario': scenario.name,
           'artifacts': _write_artifacts(out, scenario, report, times, states, channels, diagnostics),
           'diagnostics': diagnostics,
           'exit_code': code}
    if not is_test:  # pragma: no cover
        print(dumps(res['artifacts']))
    return res


if __name__ == '__main__':  # pragma: no cover
    raise SystemExit(run(parse_args())['exit_code'])
