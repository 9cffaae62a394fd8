"""
Which guarantees does a configuration enjoy? Prints the guarantee report as JSON.

Exit code 0 when finite-time synchronization is guaranteed, 1 otherwise.

"""

import argparse
import logging

from attsync.controllers import validate_guarantees
from attsync.tasks.utils import EXIT_CAVEAT, EXIT_OK, add_scenario_arguments, dumps, resolve_scenario

logger = logging.getLogger(__name__)


def add_arguments(parser):
    add_scenario_arguments(parser)


def parse_args():  # pragma: no cover
    parser = argparse.ArgumentParser()
    add_arguments(parser)
    return parser.parse_args()


def run(ARGS, scenario=None, is_test=False):
    scenario = scenario or resolve_scenario(ARGS)
    cfg = scenario.protocol_config()
    report = validate_guarantees(cfg)
    logger.info('{}: protocol {}, {} agents, {} Lipschitz'.format(scenario.name, cfg.protocol, cfg.n,
                                                                  len(cfg.lipschitz_agents)))

    res = {'scenario': scenario.name,
           'report': report.as_dict(),
           'exit_code': EXIT_OK if report.finite_time else EXIT_CAVEAT}
    if not is_test:  # pragma: no cover
        print(dumps(dict(report.as_dict(), scenario=scenario.name)))
    return res


if __name__ == '__main__':  # pragma: no cover
    raise SystemExit(run(parse_args())['exit_code'])
