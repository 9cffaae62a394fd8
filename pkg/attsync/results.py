"""
Flat-file artifacts. Every file is written to a temporary name in the target directory and moved
into place with os.replace, so readers never see a partial file.

"""

import json
import logging
import os
import tempfile

import numpy as np
import pandas

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ['t', 'agent', 'x1', 'x2', 'x3', 'norm']
DIAGNOSTIC_COLUMNS = ['t', 'V1', 'V2', 'V3', 'disagreement', 'max_norm']


def _atomic_write(path, write):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.' + os.path.basename(path), suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            write(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info('wrote {}'.format(path))
    return path


def to_builtin(obj):
    """numpy scalars and arrays to plain python for json"""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def write_json(obj, path):
    return _atomic_write(path, lambda f: f.write(json.dumps(to_builtin(obj), indent=2, sort_keys=True) + '\n'))


def write_frame(df: pandas.DataFrame, path):
    # without float_format, floats are written in their shortest round-trip form
    return _atomic_write(path, lambda f: df.to_csv(f, index=False, lineterminator='\n'))


def trajectory_frame(times, states) -> pandas.DataFrame:
    """
    One row per agent per sample, agents numbered from 1
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    K, n = len(times), states.shape[1] // 3
    X = states.reshape(K, n, 3)
    return pandas.DataFrame({'t': np.repeat(times, n),
                             'agent': np.tile(np.arange(1, n + 1), K),
                             'x1': X[:, :, 0].reshape(-1),
                             'x2': X[:, :, 1].reshape(-1),
                             'x3': X[:, :, 2].reshape(-1),
                             'norm': np.linalg.norm(X, axis=2).reshape(-1)},
                            columns=TRAJECTORY_COLUMNS)


def diagnostics_frame(times, channels) -> pandas.DataFrame:
    data = {'t': np.asarray(times, dtype=float)}
    data.update({k: np.asarray(channels[k], dtype=float) for k in DIAGNOSTIC_COLUMNS[1:]})
    return pandas.DataFrame(data, columns=DIAGNOSTIC_COLUMNS)


def read_frame(path) -> pandas.DataFrame:
    return pandas.read_csv(path, float_precision='round_trip')
