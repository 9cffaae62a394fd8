import json
import os

import numpy as np
import pytest

from attsync import cli
from attsync.errors import InvalidConfig
from attsync.results import read_frame
from attsync.scenarios import builtin_names, get_builtin
from attsync.tasks.check import run as run_check
from attsync.tasks.run import run as run_scenario
from attsync.tasks.sweep import run as run_sweep

OUT_OF_DOMAIN = {'name': 'leaves-domain',
                 'agents': [{'init': [6.2, 0, 0]},
                            {'init': [5, 0, 0], 'controller': {'kind': 'lipschitz', 'gain': 3000}}],
                 'edges': [[1, 2]],
                 'protocol': 1,
                 'integrator': {'t_max': 1}}

DISCONNECTED = {'name': 'disconnected',
                'agents': [{'init': [0.1, 0, 0]}, {'init': [0, 0.1, 0]}, {'init': [0, 0, 0.1]}],
                'edges': [[1, 2]],
                'protocol': 1}


class ConvertToNamespace(object):
    def __init__(self, adict):
        adict.setdefault('config', None)
        adict.setdefault('builtin', None)
        self.__dict__.update(adict)


def write_scenario(tmpdir, doc):
    path = tmpdir.join(doc['name'] + '.json')
    path.write(json.dumps(doc, indent=2))
    return str(path)


@pytest.mark.parametrize('name, code', [('example2-ftc', 0), ('example1-sliding', 1), ('example2-asymptotic', 1),
                                        ('protocol2-path', 0)])
def test_check(name, code):
    res = run_check(ConvertToNamespace({'builtin': name}), is_test=True)
    assert res['exit_code'] == code
    assert res['scenario'] == name
    assert set(res['report']) == {'invariance_s1', 'finite_time', 'asymptotic_only', 'sliding_risk', 'notes'}


def test_check_needs_a_scenario():
    with pytest.raises(InvalidConfig):
        run_check(ConvertToNamespace({}), is_test=True)


def test_run_finite_time(tmpdir):
    res = run_scenario(ConvertToNamespace({'builtin': 'example2-ftc', 'out': str(tmpdir)}), is_test=True)
    assert res['exit_code'] == 0
    d = res['diagnostics']
    assert d['classification']['label'] == 'finite_time'
    assert d['settling_bound_met']
    assert d['monotone'] == {'V1': True}
    assert d['status'] == 'completed'

    for name in ['trajectory.csv', 'diagnostics.csv', 'diagnostics.json', 'guarantees.json', 'scenario.json']:
        assert os.path.exists(str(tmpdir.join(name)))
    trajectory = read_frame(res['artifacts']['trajectory'])
    assert list(trajectory.columns) == ['t', 'agent', 'x1', 'x2', 'x3', 'norm']
    assert sorted(trajectory['agent'].unique()) == [1, 2, 3]
    diagnostics = read_frame(res['artifacts']['channels'])
    assert list(diagnostics.columns) == ['t', 'V1', 'V2', 'V3', 'disagreement', 'max_norm']
    with open(res['artifacts']['diagnostics']) as f:
        assert json.load(f)['exit_code'] == 0


def test_run_is_reproducible(tmpdir):
    first, second = tmpdir.mkdir('first'), tmpdir.mkdir('second')
    for out in (first, second):
        run_scenario(ConvertToNamespace({'builtin': 'protocol2-path', 'out': str(out)}), is_test=True)
    for name in sorted(os.listdir(str(first))):
        with open(str(first.join(name)), 'rb') as f1, open(str(second.join(name)), 'rb') as f2:
            assert f1.read() == f2.read()


def test_run_protocol2(tmpdir):
    res = run_scenario(ConvertToNamespace({'builtin': 'protocol2-path', 'out': str(tmpdir)}), is_test=True)
    d = res['diagnostics']
    assert d['monotone'] == {'V3': True}
    assert d['rate_constants'] is None
    assert d['classification']['label'] == 'finite_time'
    assert res['exit_code'] == 0


def test_run_sliding_certificate(tmpdir):
    res = run_scenario(ConvertToNamespace({'builtin': 'example1-sliding-analytic', 'out': str(tmpdir)}),
                       is_test=True)
    d = res['diagnostics']
    assert res['exit_code'] == 0
    assert d['membership_pass']
    assert d['max_residual'] <= 1e-12
    assert abs(d['pi_crossing_time'] - 2 * (np.pi - 3)) < 1e-12
    assert d['first_sample_above_pi'] >= d['pi_crossing_time']
    assert len(read_frame(res['artifacts']['trajectory'])) == 300


def test_consensus_event_uses_scenario_tolerance(tmpdir):
    doc = get_builtin('example2-ftc').to_dict()
    doc.update({'name': 'ftc-coarse', 'tolerance': 1e-2})
    ARGS = ConvertToNamespace({'config': write_scenario(tmpdir, doc), 'out': str(tmpdir)})
    res = run_scenario(ARGS, is_test=True)
    d = res['diagnostics']
    consensus = [t for t, kind in d['events'] if kind == 'consensus']
    assert len(consensus) == 1
    channels = read_frame(res['artifacts']['channels'])
    first_below = channels['t'][channels['disagreement'] < 1e-2].iloc[0]
    assert abs(consensus[0] - first_below) < 1e-9
    assert consensus[0] <= d['classification']['T_c']


def test_sweep(tmpdir):
    ARGS = ConvertToNamespace({'builtin': 'example2-ftc', 'out': str(tmpdir), 'trials': 4, 'max_norm': 1.,
                               'workers': 1})
    res = run_sweep(ARGS, is_test=True)
    summary = res['summary']
    assert summary['trials'] == 4
    assert summary['invariance'] == 1.
    assert summary['monotone'] == 1.
    assert sum(summary['labels'].values()) == 4
    assert list(res['trials']['trial']) == [0, 1, 2, 3]
    with open(str(tmpdir.join('summary.json'))) as f:
        assert json.load(f)['trials'] == 4


def test_sweep_finite_time_configuration(tmpdir):
    ARGS = ConvertToNamespace({'builtin': 'example2-ftc', 'out': str(tmpdir), 'trials': 100,
                               'max_norm': 0.9 * np.pi, 'workers': 4})
    res = run_sweep(ARGS, is_test=True)
    summary = res['summary']
    assert summary['invariance'] == 1.
    assert summary['monotone'] == 1.
    assert summary['finite_time'] == 1.
    assert summary['settling_bound'] == 1.
    assert summary['labels'] == {'finite_time': 100, 'asymptotic': 0, 'none': 0}
    assert summary['out_of_domain'] == 0
    assert res['exit_code'] == 0


def test_cli_sweep_protocol2(tmpdir):
    code = cli.main(['sweep', '--builtin', 'protocol2-path', '--out', str(tmpdir), '--trials', '5',
                     '--max-norm', '1.', '--workers', '2'])
    with open(str(tmpdir.join('summary.json'))) as f:
        summary = json.load(f)
    assert summary['trials'] == 5
    assert summary['monotone'] == 1.
    assert summary['invariance'] == 1.
    assert summary['settling_bound'] is None
    assert code == (0 if summary['finite_time'] == 1. else 1)


def test_sweep_is_independent_of_workers(tmpdir):
    frames = []
    for workers in (1, 2):
        out = tmpdir.mkdir('w{}'.format(workers))
        ARGS = ConvertToNamespace({'builtin': 'protocol2-path', 'out': str(out), 'trials': 2, 'max_norm': 1.,
                                   'workers': workers})
        run_sweep(ARGS, is_test=True)
        with open(str(out.join('trials.csv')), 'rb') as f:
            frames.append(f.read())
    assert frames[0] == frames[1]


@pytest.mark.parametrize('trials, max_norm', [(0, 1.), (2, 4.), (2, -1.)])
def test_sweep_bounds(tmpdir, trials, max_norm):
    ARGS = ConvertToNamespace({'builtin': 'example2-ftc', 'out': str(tmpdir), 'trials': trials,
                               'max_norm': max_norm, 'workers': 1})
    with pytest.raises(InvalidConfig):
        run_sweep(ARGS, is_test=True)
    argv = ['sweep', '--builtin', 'example2-ftc', '--out', str(tmpdir), '--trials', str(trials),
            '--max-norm', str(max_norm)]
    assert cli.main(argv) == 2


def test_sweep_protocol2_bound(tmpdir):
    # 3 * 1.9^2 > pi^2
    assert cli.main(['sweep', '--builtin', 'protocol2-path', '--out', str(tmpdir), '--max-norm', '1.9']) == 2


def test_cli_exit_codes(tmpdir):
    out = str(tmpdir.mkdir('out'))
    assert cli.main(['check', '--builtin', 'example2-ftc']) == 0
    assert cli.main(['check', '--builtin', 'example1-sliding']) == 1
    assert cli.main(['check', '--builtin', 'nonexistent']) == 2
    assert cli.main(['check', str(tmpdir.join('missing.json'))]) == 2
    assert cli.main(['check', write_scenario(tmpdir, DISCONNECTED)]) == 2
    assert cli.main(['run', write_scenario(tmpdir, OUT_OF_DOMAIN), '--out', out]) == 3
    assert cli.main([]) == 2

    with open(os.path.join(out, 'diagnostics.json')) as f:
        d = json.load(f)
    assert d['status'] == 'out_of_domain'
    assert 'agent 2' in d['message']


def test_cli_list(capsys):
    assert cli.main(['list']) == 0
    printed = capsys.readouterr().out
    for name in builtin_names:
        assert name in printed


def test_cli_bad_log_level(monkeypatch):
    monkeypatch.setenv('ATTSYNC_LOG', 'chatty')
    assert cli.main(['list']) == 2
