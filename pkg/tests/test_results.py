import json
import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas
from numpy.testing import assert_allclose

from attsync.results import DIAGNOSTIC_COLUMNS, TRAJECTORY_COLUMNS, diagnostics_frame, read_frame, to_builtin, \
    trajectory_frame, write_frame, write_json


class TestResults(unittest.TestCase):
    def setUp(self):
        self.tmp_path = tempfile.mkdtemp()
        self.times = np.array([0., 0.1, 0.2])
        self.states = np.array([[0.1, 0.2, 0.3, -0.1, 0., 1. / 3.],
                                [0.05, 0.1, 0.15, -0.05, 0., 0.2],
                                [0., 0., 0., 0., 0., 0.]])

    def tearDown(self):
        shutil.rmtree(self.tmp_path)

    def test_trajectory_frame(self):
        df = trajectory_frame(self.times, self.states)
        assert list(df.columns) == TRAJECTORY_COLUMNS
        assert len(df) == 6
        assert list(df['agent']) == [1, 2, 1, 2, 1, 2]
        assert_allclose(df['x3'], [0.3, 1. / 3., 0.15, 0.2, 0., 0.])
        assert_allclose(df['norm'][0], np.linalg.norm([0.1, 0.2, 0.3]))

    def test_frame_round_trip_is_exact(self):
        path = os.path.join(self.tmp_path, 'trajectory.csv')
        df = trajectory_frame(self.times, self.states)
        write_frame(df, path)
        with open(path) as f:
            assert f.readline() == 't,agent,x1,x2,x3,norm\n'
        back = read_frame(path)
        assert np.array_equal(back['x3'].values, df['x3'].values)
        assert np.array_equal(back['norm'].values, df['norm'].values)

    def test_diagnostics_frame(self):
        channels = {k: np.arange(3.) for k in DIAGNOSTIC_COLUMNS[1:]}
        channels['rotation_gap'] = np.zeros(3)
        df = diagnostics_frame(self.times, channels)
        assert list(df.columns) == DIAGNOSTIC_COLUMNS

    def test_writes_are_deterministic(self):
        df = trajectory_frame(self.times, self.states)
        first, second = os.path.join(self.tmp_path, 'a.csv'), os.path.join(self.tmp_path, 'b.csv')
        write_frame(df, first)
        write_frame(df, second)
        with open(first, 'rb') as f1, open(second, 'rb') as f2:
            assert f1.read() == f2.read()

    def test_write_json(self):
        path = os.path.join(self.tmp_path, 'nested', 'out.json')
        write_json({'b': np.float64(0.5), 'a': np.arange(2), 'c': np.bool_(True), 'd': float('inf')}, path)
        with open(path) as f:
            text = f.read()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {'a': [0, 1], 'b': 0.5, 'c': True, 'd': None}

    def test_failed_write_leaves_nothing(self):
        path = os.path.join(self.tmp_path, 'bad.csv')

        class Broken(pandas.DataFrame):
            def to_csv(self, *args, **kwargs):
                raise RuntimeError('disk full')

        with self.assertRaises(RuntimeError):
            write_frame(Broken({'t': [0.]}), path)
        assert os.listdir(self.tmp_path) == []

    def test_to_builtin(self):
        out = to_builtin({1: (np.int64(2), np.float32(0.5)), 'x': [np.nan]})
        assert out == {'1': [2, 0.5], 'x': [None]}
        assert type(out['1'][0]) is int
