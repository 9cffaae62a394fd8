import configparser
import logging
import os

cfg = configparser.ConfigParser()
dirs = [os.curdir, os.path.dirname(os.path.realpath(__file__)),
        os.path.join(os.path.dirname(os.path.realpath(__file__)), '..')]
locations = map(os.path.abspath, dirs)

for loc in locations:
    if cfg.read(os.path.join(loc, 'attsyncrc')):
        break

def expand_to_absolute(path):
    if './' == path[:2]:
        return os.path.join(os.path.dirname(os.path.realpath(__file__)), path[2:])
    else:
        return path

RESULTS_PATH = expand_to_absolute(cfg['paths']['results_path'])
BASE_SEED = int(cfg['seeds']['seed'])

LOG_DELTA = float(cfg['numerics']['log_delta'])
SIGN_DEADBAND = float(cfg['numerics']['sign_deadband'])
TAYLOR_THRESHOLD = float(cfg['numerics']['taylor_threshold'])
REORTHONORMALIZE_EVERY = int(cfg['numerics']['reorthonormalize_every'])
CHATTERING_FACTOR = float(cfg['numerics']['chattering_factor'])

LOG_LEVELS = {'error': logging.ERROR, 'info': logging.INFO, 'debug': logging.DEBUG}
LOG_LEVEL = cfg['logging'].get('level', 'info')


def configure_logging(level=None):
    """
    Configure the root logger once for command line use. ATTSYNC_LOG wins over the rc file.

    :param level: one of 'error', 'info', 'debug', or None to read the environment
    :return: the numeric level in use
    """
    name = (level or os.environ.get('ATTSYNC_LOG') or LOG_LEVEL).lower()
    if name not in LOG_LEVELS:
        raise ValueError('ATTSYNC_LOG must be one of {}, got {!r}'.format(sorted(LOG_LEVELS), name))
    logging.basicConfig(format='%(asctime)s %(name)s %(levelname)s: %(message)s')
    logging.getLogger().setLevel(LOG_LEVELS[name])
    return LOG_LEVELS[name]
