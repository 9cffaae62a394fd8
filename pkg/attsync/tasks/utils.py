"""
Helpers shared by the check, run and sweep commands.

"""

import json
import os

from attsync.errors import InvalidConfig
from attsync.results import to_builtin
from attsync.scenarios import ScenarioFile, get_builtin, load_scenario
from attsync.settings import RESULTS_PATH

EXIT_OK = 0
EXIT_CAVEAT = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3

# slack on the settling-time bound, absorbing the chattering-control tail
SETTLING_SLACK = 1.1


def add_scenario_arguments(parser):
    parser.add_argument("config", default=None, nargs='?', type=str)
    parser.add_argument("--builtin", default=None, nargs='?', type=str)


def add_output_argument(parser):
    parser.add_argument("--out", default=None, nargs='?', type=str)


def resolve_scenario(ARGS) -> ScenarioFile:
    """
    The scenario named by --builtin, else the one in the config file
    """
    builtin = getattr(ARGS, 'builtin', None)
    config = getattr(ARGS, 'config', None)
    if builtin:
        return get_builtin(builtin)
    if not config:
        raise InvalidConfig('give a scenario file or --builtin NAME')
    return load_scenario(config)


def output_dir(ARGS, scenario: ScenarioFile) -> str:
    out = getattr(ARGS, 'out', None) or os.path.join(RESULTS_PATH, scenario.name)
    os.makedirs(out, exist_ok=True)
    return out


def dumps(obj) -> str:
    return json.dumps(to_builtin(obj), indent=2, sort_keys=True)
