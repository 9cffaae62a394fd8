import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from attsync.controllers import LipschitzDirectional, ProtocolConfig, SignComponentwise, SignDirectional, \
    control, control_protocol1, control_protocol2, controller_kinds, disagreement, get_controller_kind, \
    guarantees, protocol2_stacked, sign_componentwise, sign_componentwise_smoothed, sign_directional, \
    sign_smoothed, validate_guarantees
from attsync.errors import Disconnected, InvalidConfig
from attsync.graphs import Topology, complete_graph, from_edge_list, laplacian, path_graph

vectors = st.lists(st.floats(-10., 10., allow_nan=False), min_size=3, max_size=3).map(np.array)


def protocol1(topology, *kinds):
    return ProtocolConfig(topology, kinds, 1)


def test_registry():
    assert controller_kinds == ['lipschitz', 'sign', 'sign_c']
    assert get_controller_kind('sign') == SignDirectional()
    assert get_controller_kind('lipschitz', gain=2.) == LipschitzDirectional(gain=2.)
    with pytest.raises(InvalidConfig):
        get_controller_kind('tanh')
    with pytest.raises(InvalidConfig):
        get_controller_kind('sign', gain=2.)
    with pytest.raises(InvalidConfig):
        get_controller_kind('lipschitz', gain=-1.)


def test_sign_directional_examples():
    assert_allclose(sign_directional(np.zeros(3)), np.zeros(3))
    assert_allclose(sign_directional([3., 4., 0.]), [0.6, 0.8, 0.])
    assert_allclose(sign_directional([1e-10, 0., 0.]), np.zeros(3))

    rng = np.random.RandomState(0)
    W = rng.randn(10000, 3)
    W[::100] = 0.
    norms = np.linalg.norm(sign_directional(W), axis=1)
    assert np.all((np.abs(norms - 1.) < 1e-15) | (norms == 0.))


@given(vectors)
def test_sign_directional_is_scale_invariant(w):
    if np.linalg.norm(w) < 1e-6:
        return
    for k in (-3, 1, 5):
        assert np.array_equal(sign_directional(2. ** k * w), sign_directional(w))
    assert_allclose(sign_directional(0.37 * w), sign_directional(w), atol=1e-15)


def test_sign_componentwise_examples():
    assert_allclose(sign_componentwise([-2., 0., 5.]), [-1., 0., 1.])
    assert_allclose(sign_componentwise([0.7]), sign_directional([0.7]))
    assert_allclose(sign_componentwise([-0.7]), sign_directional([-0.7]))

    rng = np.random.RandomState(1)
    W = rng.randint(-1, 2, size=(10000, 3)) * rng.rand(10000, 3)
    S = sign_componentwise(W)
    assert set(np.unique(S)) <= {-1., 0., 1.}
    assert len({tuple(s) for s in S}) <= 27


def test_smoothed_signs():
    assert_allclose(sign_smoothed([0.5e-3, 0., 0.], 1e-3), [0.5, 0., 0.])
    assert_allclose(sign_smoothed([2., 0., 0.], 1e-3), [1., 0., 0.])
    assert_allclose(sign_componentwise_smoothed([0.5e-3, -2., 0.], 1e-3), [0.5, -1., 0.])


def test_lipschitz_directional():
    f = LipschitzDirectional()
    assert_allclose(f(np.zeros(3)), np.zeros(3))
    assert_allclose(f([1., 2., 3.]), [1., 2., 3.])
    g = LipschitzDirectional(gain=2., saturation=1.)
    assert_allclose(g([0.1, 0., 0.]), [0.2, 0., 0.])
    assert_allclose(g([3., 4., 0.]), [0.6, 0.8, 0.])


def test_consensus_gives_zero_control():
    x = np.tile([0.3, -0.1, 0.7], 3)
    cfg = protocol1(path_graph(3), LipschitzDirectional(), SignDirectional(), SignDirectional())
    assert np.all(control(x, cfg) == 0.)
    cfg2 = ProtocolConfig(complete_graph(3), None, 2)
    assert np.all(control(x, cfg2) == 0.)


def test_protocol1_two_agents():
    cfg = protocol1(complete_graph(2), SignDirectional(), SignDirectional())
    assert_allclose(control_protocol1([1., 0., 0., 0., 0., 0.], cfg), [-1., 0., 0., 1., 0., 0.])


def test_protocol1_lipschitz_agent():
    cfg = protocol1(path_graph(3), LipschitzDirectional(), SignDirectional(), SignDirectional())
    x = np.array([0.5, 0., 0., 0., 0.5, 0., 0., 0., 0.5])
    w = control_protocol1(x, cfg).reshape(3, 3)
    assert_allclose(w[0], x[3:6] - x[0:3])
    assert_allclose(w[1], sign_directional(x[0:3] + x[6:9] - 2 * x[3:6]))
    assert_allclose(w[2], sign_directional(x[3:6] - x[6:9]))


def test_direction_preservation():
    rng = np.random.RandomState(2)
    cfg = protocol1(complete_graph(4), LipschitzDirectional(gain=0.5, saturation=0.3), SignDirectional(),
                    SignDirectional(), SignDirectional())
    for _ in range(100):
        x = rng.randn(12)
        Y = disagreement(x, cfg)
        W = control_protocol1(x, cfg).reshape(4, 3)
        for y, w in zip(Y, W):
            assert abs(w @ y - np.linalg.norm(w) * np.linalg.norm(y)) < 1e-12


def test_protocol2_examples():
    cfg = ProtocolConfig(complete_graph(2), None, 2)
    assert_allclose(control_protocol2([1., -1., 0., 0., 0., 0.], cfg), [-1., 1., 0., 1., -1., 0.])


def test_protocol2_stacked_form():
    rng = np.random.RandomState(3)
    for T in [path_graph(4), complete_graph(4), from_edge_list(4, [[1, 2], [3, 2], [4, 1], [3, 4]])]:
        cfg = ProtocolConfig(T, None, 2)
        degree = np.array([len([e for e in T.edges if k in e[:2]]) for k in range(4)])
        for _ in range(50):
            x = rng.randn(12)
            x[3:6] = x[0:3]  # a tie on one edge
            w = control_protocol2(x, cfg)
            assert np.max(np.abs(w - protocol2_stacked(x, cfg))) < 1e-14
            assert np.all(np.abs(w.reshape(4, 3)) <= degree[:, None])


def test_protocol2_weights():
    cfg = ProtocolConfig(from_edge_list(2, [[1, 2, 2.5]]), None, 2)
    assert_allclose(control_protocol2([0., 0., 1., 0., 0., 0.], cfg), [0., 0., -2.5, 0., 0., 2.5])
    assert_allclose(protocol2_stacked([0., 0., 1., 0., 0., 0.], cfg), [0., 0., -2.5, 0., 0., 2.5])


def test_protocol2_smoothed():
    # every difference is below eps = 1, so sign_c is the identity and w = -L x
    cfg = ProtocolConfig(path_graph(3), None, 2)
    x = np.array([0.5, 0., 0., 0., 0.5, 0., 0., 0., 0.5])
    assert_allclose(control(x, cfg, eps=1.), -(laplacian(path_graph(3)) @ x.reshape(3, 3)).reshape(-1))
    assert_allclose(control(x, cfg, eps=1e-3), control_protocol2(x, cfg))


def test_invalid_configs():
    with pytest.raises(InvalidConfig):
        ProtocolConfig(path_graph(3), (SignDirectional(),) * 2, 1)
    with pytest.raises(InvalidConfig):
        ProtocolConfig(path_graph(3), (SignComponentwise(),) * 3, 1)
    with pytest.raises(InvalidConfig):
        ProtocolConfig(path_graph(3), (SignDirectional(),) * 3, 2)
    with pytest.raises(InvalidConfig):
        ProtocolConfig(path_graph(3), None, 3)
    with pytest.raises(InvalidConfig):
        ProtocolConfig(Topology(1, ()), (SignDirectional(),), 1)


def test_lipschitz_agents_are_derived():
    cfg = protocol1(path_graph(3), LipschitzDirectional(), SignDirectional(), LipschitzDirectional())
    assert cfg.lipschitz_agents == (0, 2)
    assert ProtocolConfig(path_graph(3), None, 2).lipschitz_agents == ()


def test_guarantee_examples():
    L, S = LipschitzDirectional(), SignDirectional()
    assert validate_guarantees(protocol1(path_graph(3), L, S, S)).finite_time
    assert validate_guarantees(protocol1(complete_graph(3), S, S, S)).sliding_risk
    assert validate_guarantees(protocol1(complete_graph(2), L, L)).asymptotic_only
    report = validate_guarantees(ProtocolConfig(path_graph(3), None, 2))
    assert report.finite_time
    assert 'pi^2' in report.notes

    with pytest.raises(Disconnected):
        validate_guarantees(protocol1(Topology(4, ((0, 1, 1.), (2, 3, 1.))), L, S, S, S))


@pytest.mark.parametrize('n', [2, 3, 4, 5])
def test_guarantee_table(n):
    for k in range(n + 1):
        r = guarantees(n, k)
        assert r.finite_time == ((n > 2 and k == 1) or (n == 2 and k <= 1))
        assert r.invariance_s1 == ((n == 2 and k == 0) or k >= 1)
        assert r.sliding_risk == (n > 2 and k == 0)
        assert r.asymptotic_only == (k == n)
        if r.finite_time:
            assert r.invariance_s1
        if r.sliding_risk:
            assert not r.invariance_s1
        assert r.notes

    r = guarantees(n, 0, protocol=2)
    assert r.finite_time and r.invariance_s1
    assert not (r.sliding_risk or r.asymptotic_only)
    assert 'S_1(sqrt(C))' in r.notes


def test_guarantees_depend_only_on_counts():
    L, S = LipschitzDirectional(), SignDirectional()
    reports = {validate_guarantees(protocol1(complete_graph(4), *kinds))
               for kinds in itertools.permutations([L, S, S, S])}
    assert len(reports) == 1
