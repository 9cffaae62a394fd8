"""
attsync check|run|sweep|list

Exit codes: 0 success or finite time guaranteed, 1 completed with a caveat, 2 configuration error,
3 the state left the transition-matrix domain.

"""

import argparse
import logging
import sys

from attsync.errors import AngleNearPi, AttsyncError, OutOfDomain
from attsync.scenarios import _ALL_SCENARIOS, builtin_names
from attsync.settings import configure_logging
from attsync.tasks import check, run, sweep
from attsync.tasks.utils import EXIT_CONFIG, EXIT_DOMAIN, EXIT_OK

logger = logging.getLogger('attsync')

COMMANDS = {'check': check, 'run': run, 'sweep': sweep}


def build_parser():
    parser = argparse.ArgumentParser(prog='attsync', description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest='command')
    for name, module in COMMANDS.items():
        module.add_arguments(sub.add_parser(name, help=(module.__doc__ or '').strip().splitlines()[0]))
    sub.add_parser('list', help='print the builtin scenarios')
    return parser


def main(argv=None):
    parser = build_parser()
    ARGS = parser.parse_args(argv)
    try:
        configure_logging()
    except ValueError as e:
        print('attsync: {}'.format(e), file=sys.stderr)
        return EXIT_CONFIG

    if ARGS.command is None:
        parser.print_help()
        return EXIT_CONFIG
    if ARGS.command == 'list':
        for name in builtin_names:
            print('{:28s} {}'.format(name, _ALL_SCENARIOS[name].description))
        return EXIT_OK

    try:
        return COMMANDS[ARGS.command].run(ARGS)['exit_code']
    except (OutOfDomain, AngleNearPi) as e:
        logger.error('domain violation: {}'.format(e))
        return EXIT_DOMAIN
    except AttsyncError as e:
        logger.error('{}: {}'.format(type(e).__name__, e))
        return EXIT_CONFIG


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
