"""
Scenario files and the compiled-in scenarios.

A scenario is a JSON object with the lowercase keys

    name        text
    agents      [{"init": [x, y, z] | [9 row-major rotation entries] | "random(C)",
                  "controller": {"kind": "sign" | "lipschitz" | "sign_c", ...params}}, ...]
    edges       [[i, j] | [i, j, w], ...]          (1-based agent indices)
    protocol    1 | 2
    integrator  {"h", "t_max", "mode", "eps", "record_every", "stop_tolerance", ...}  (optional)
    tolerance   consensus tolerance (optional, 1e-6)
    seed        seed for "random(C)" initial conditions (optional, 0)
    analytic    {"type": "sliding", "xbar", "eps1", "t0", "samples"}  (optional)

Schema violations raise ScenarioError carrying the line of the offending value.

"""

import json
import logging
import re
from dataclasses import dataclass, fields, replace
from json.decoder import scanstring
from typing import Optional, Tuple, Union

import numpy as np

from attsync.controllers import ProtocolConfig, get_controller_kind
from attsync.errors import AngleNearPi, InvalidConfig, NotARotation, ScenarioError, TopologyError
from attsync.graphs import complete_graph, from_edge_list, path_graph
from attsync.sampling import SplitMix64, random_axis_angle, trial_seed
from attsync.settings import BASE_SEED
from attsync.simulation import IntegratorConfig
from attsync.so3 import as_rotation, log_map

logger = logging.getLogger(__name__)

_ALL_SCENARIOS = {}

RANDOM_INIT = re.compile(r'^random\(\s*([0-9.eE+-]+)\s*\)$')
TOP_LEVEL_KEYS = ('name', 'agents', 'edges', 'protocol', 'integrator', 'tolerance', 'seed', 'analytic')
REQUIRED_KEYS = ('name', 'agents', 'edges', 'protocol')
INTEGRATOR_KEYS = tuple(f.name for f in fields(IntegratorConfig))
ANALYTIC_KEYS = ('type', 'xbar', 'eps1', 't0', 'samples')


def add_scenario(C):
    _ALL_SCENARIOS.update({C.name: C})
    return C


@dataclass(frozen=True)
class AgentSpec:
    init: Union[Tuple[float, ...], str]
    controller: str = 'sign'
    params: Tuple[Tuple[str, float], ...] = ()

    @property
    def random_radius(self):
        if isinstance(self.init, str):
            return float(RANDOM_INIT.match(self.init).group(1))
        return None

    def kind(self):
        return get_controller_kind(self.controller, **dict(self.params))

    def to_dict(self):
        init = self.init if isinstance(self.init, str) else list(self.init)
        return {'init': init, 'controller': dict({'kind': self.controller}, **dict(self.params))}


@dataclass(frozen=True)
class SlidingSpec:
    """The closed-form sliding consensus x(t) = 1 kron (xbar + (t - t0) eps1 xbar/||xbar||)"""
    xbar: Tuple[float, float, float]
    eps1: float
    t0: float = 0.
    samples: int = 100

    def to_dict(self):
        return {'type': 'sliding', 'xbar': list(self.xbar), 'eps1': self.eps1, 't0': self.t0,
                'samples': self.samples}


@dataclass(frozen=True)
class ScenarioFile:
    name: str
    agents: Tuple[AgentSpec, ...]
    edges: Tuple[Tuple[int, int, float], ...]
    protocol: int = 1
    integrator: IntegratorConfig = IntegratorConfig()
    tolerance: float = 1e-6
    seed: int = 0
    analytic: Optional[SlidingSpec] = None

    @property
    def n(self):
        return len(self.agents)

    def topology(self):
        return from_edge_list(self.n, self.edges)

    def protocol_config(self):
        kinds = tuple(a.kind() for a in self.agents)
        return ProtocolConfig(self.topology(), kinds, self.protocol)

    def integrator_config(self):
        """the integrator with its consensus event at the scenario tolerance"""
        return replace(self.integrator, event_tolerance=self.tolerance)

    def initial_state(self, trial: int=0, max_norm: float=None) -> np.ndarray:
        """
        The stacked initial state. "random(C)" agents draw from one splitmix64 stream seeded by the
        base seed, the scenario seed and the trial index; max_norm forces random(max_norm) for every
        agent (sweeps).
        """
        rng = SplitMix64(trial_seed(BASE_SEED + self.seed, trial))
        blocks = []
        for a in self.agents:
            if max_norm is not None:
                blocks.append(random_axis_angle(rng, max_norm))
            elif isinstance(a.init, str):
                blocks.append(random_axis_angle(rng, a.random_radius))
            elif len(a.init) == 9:
                blocks.append(log_map(as_rotation(a.init)))
            else:
                blocks.append(np.array(a.init, dtype=float))
        return np.concatenate(blocks)

    def to_dict(self):
        d = {'name': self.name,
             'agents': [a.to_dict() for a in self.agents],
             'edges': [[i, j, w] for i, j, w in self.edges],
             'protocol': self.protocol,
             'integrator': {k: getattr(self.integrator, k) for k in INTEGRATOR_KEYS
                            if getattr(self.integrator, k) is not None},
             'tolerance': self.tolerance,
             'seed': self.seed}
        if self.analytic is not None:
            d['analytic'] = self.analytic.to_dict()
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _value_offsets(text):
    """
    Character offset of every value in a valid JSON document, keyed by its path of keys and indices
    """
    offsets = {}
    decoder = json.JSONDecoder()

    def skip(i):
        while i < len(text) and text[i] in ' \t\r\n':
            i += 1
        return i

    def walk(i, path):
        i = skip(i)
        offsets[path] = i
        if text[i] == '{':
            i = skip(i + 1)
            if text[i] == '}':
                return i + 1
            while True:
                key, i = scanstring(text, i + 1)
                i = skip(i)
                i = walk(i + 1, path + (key,))
                i = skip(i)
                if text[i] == '}':
                    return i + 1
                i = skip(i + 1)
        if text[i] == '[':
            i = skip(i + 1)
            if text[i] == ']':
                return i + 1
            k = 0
            while True:
                i = skip(walk(i, path + (k,)))
                k += 1
                if text[i] == ']':
                    return i + 1
                i += 1
        _, end = decoder.raw_decode(text, i)
        return end

    walk(0, ())
    return offsets


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.offsets = None

    def line(self, path):
        if self.offsets is None:
            self.offsets = _value_offsets(self.text)
        while path not in self.offsets and path:
            path = path[:-1]
        return self.text.count('\n', 0, self.offsets.get(path, 0)) + 1

    def fail(self, path, message):
        raise ScenarioError(message, line=self.line(path))

    def keys(self, obj, path, allowed, required=()):
        if not isinstance(obj, dict):
            self.fail(path, '{} must be an object'.format('/'.join(map(str, path)) or 'scenario'))
        for k in obj:
            if k not in allowed:
                self.fail(path + (k,), 'unknown key {!r}, expected one of {}'.format(k, list(allowed)))
        for k in required:
            if k not in obj:
                self.fail(path, 'missing required key {!r}'.format(k))

    def number(self, v, path, positive=False):
        if not _is_number(v):
            self.fail(path, '{} must be a number, got {!r}'.format(path[-1], v))
        if positive and not v > 0:
            self.fail(path, '{} must be positive, got {!r}'.format(path[-1], v))
        return float(v)

    def parse(self):
        try:
            doc = json.loads(self.text)
        except json.JSONDecodeError as e:
            raise ScenarioError('invalid JSON: {}'.format(e.msg), line=e.lineno)
        self.keys(doc, (), TOP_LEVEL_KEYS, REQUIRED_KEYS)

        name = doc['name']
        if not isinstance(name, str) or not name:
            self.fail(('name',), 'name must be a non-empty string')
        protocol = doc['protocol']
        if not _is_int(protocol) or protocol not in (1, 2):
            self.fail(('protocol',), 'protocol must be 1 or 2, got {!r}'.format(protocol))

        agents = self.agents(doc['agents'], protocol)
        edges = self.edges(doc['edges'], len(agents))
        integrator = self.integrator(doc.get('integrator', {}))
        tolerance = self.number(doc.get('tolerance', 1e-6), ('tolerance',), positive=True)
        seed = doc.get('seed', 0)
        if not _is_int(seed) or seed < 0:
            self.fail(('seed',), 'seed must be an unsigned integer, got {!r}'.format(seed))
        analytic = self.analytic(doc['analytic']) if 'analytic' in doc else None

        scenario = ScenarioFile(name=name, agents=agents, edges=edges, protocol=protocol, integrator=integrator,
                                tolerance=tolerance, seed=seed, analytic=analytic)
        try:
            scenario.protocol_config()
        except InvalidConfig as e:
            self.fail(('agents',), str(e))
        return scenario

    def agents(self, agents, protocol):
        if not isinstance(agents, list) or len(agents) < 2:
            self.fail(('agents',), 'agents must be a list of at least two agents')
        out = []
        for k, a in enumerate(agents):
            path = ('agents', k)
            self.keys(a, path, ('init', 'controller'), ('init',))
            init = self.init(a['init'], path + ('init',))
            controller = a.get('controller', {'kind': 'sign' if protocol == 1 else 'sign_c'})
            self.keys(controller, path + ('controller',), ('kind', 'gain', 'saturation'), ('kind',))
            params = tuple(sorted((p, self.number(v, path + ('controller', p), positive=True))
                                  for p, v in controller.items() if p != 'kind'))
            try:
                get_controller_kind(controller['kind'], **dict(params))
            except InvalidConfig as e:
                self.fail(path + ('controller',), str(e))
            out.append(AgentSpec(init, controller['kind'], params))
        return tuple(out)

    def init(self, init, path):
        if isinstance(init, str):
            m = RANDOM_INIT.match(init)
            if m is None:
                self.fail(path, 'init string must be "random(C)", got {!r}'.format(init))
            try:
                radius = float(m.group(1))
            except ValueError:
                radius = None
            if radius is None or not 0 < radius < 2 * np.pi:
                self.fail(path, 'random init radius must lie in (0, 2 pi), got {!r}'.format(m.group(1)))
            return init
        if not isinstance(init, list) or len(init) not in (3, 9):
            self.fail(path, 'init must be an axis-angle triple, a row-major rotation 9-tuple or "random(C)"')
        values = tuple(self.number(v, path + (k,)) for k, v in enumerate(init))
        if len(values) == 3 and not np.linalg.norm(values) < 2 * np.pi:
            self.fail(path, 'axis-angle init must have norm below 2 pi')
        if len(values) == 9:
            try:
                log_map(as_rotation(values))
            except (NotARotation, AngleNearPi) as e:
                self.fail(path, str(e))
        return values

    def edges(self, edges, n):
        if not isinstance(edges, list):
            self.fail(('edges',), 'edges must be a list of [i, j] or [i, j, w]')
        out = []
        for k, e in enumerate(edges):
            path = ('edges', k)
            if not isinstance(e, list) or len(e) not in (2, 3):
                self.fail(path, 'edge must be [i, j] or [i, j, w], got {!r}'.format(e))
            i, j = e[0], e[1]
            for idx, v in enumerate((i, j)):
                if not _is_int(v) or not 1 <= v <= n:
                    self.fail(path + (idx,), 'agent index {!r} outside 1..{}'.format(v, n))
            w = self.number(e[2], path + (2,), positive=True) if len(e) == 3 else 1.
            out.append((i, j, w))
        try:
            from_edge_list(n, out)
        except TopologyError as e:
            self.fail(('edges',), str(e))
        return tuple(out)

    def integrator(self, spec):
        path = ('integrator',)
        self.keys(spec, path, INTEGRATOR_KEYS)
        for k, v in spec.items():
            if k == 'mode':
                continue
            if k in ('record_every',):
                if not _is_int(v):
                    self.fail(path + (k,), 'record_every must be an integer')
            elif k in ('reorthonormalize_rotations', 'track_rotations'):
                if not isinstance(v, bool):
                    self.fail(path + (k,), '{} must be true or false'.format(k))
            elif v is not None:
                self.number(v, path + (k,))
        try:
            return IntegratorConfig(**spec)
        except InvalidConfig as e:
            self.fail(path, str(e))

    def analytic(self, spec):
        path = ('analytic',)
        self.keys(spec, path, ANALYTIC_KEYS, ('type', 'xbar', 'eps1'))
        if spec['type'] != 'sliding':
            self.fail(path + ('type',), 'only the "sliding" analytic solution is known, got {!r}'.format(spec['type']))
        xbar = spec['xbar']
        if not isinstance(xbar, list) or len(xbar) != 3:
            self.fail(path + ('xbar',), 'xbar must be an axis-angle triple')
        xbar = tuple(self.number(v, path + ('xbar', k)) for k, v in enumerate(xbar))
        if not np.linalg.norm(xbar) > 0:
            self.fail(path + ('xbar',), 'xbar must be nonzero')
        eps1 = self.number(spec['eps1'], path + ('eps1',), positive=True)
        if not eps1 < 1:
            self.fail(path + ('eps1',), 'eps1 must lie in (0, 1)')
        t0 = self.number(spec.get('t0', 0.), path + ('t0',))
        samples = spec.get('samples', 100)
        if not _is_int(samples) or samples < 2:
            self.fail(path + ('samples',), 'samples must be an integer of at least 2')
        return SlidingSpec(xbar, eps1, t0, samples)


def parse_scenario(text: str) -> ScenarioFile:
    return _Parser(text).parse()


def load_scenario(path: str) -> ScenarioFile:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ScenarioError('cannot read scenario {}: {}'.format(path, e.strerror))
    scenario = parse_scenario(text)
    logger.info('loaded scenario {} from {}'.format(scenario.name, path))
    return scenario


class Builtin(object):
    name = None
    description = ''

    def build(self) -> ScenarioFile:
        raise NotImplementedError


def _edges(topology):
    return tuple((i + 1, j + 1, w) for i, j, w in topology.edges)


def _agents(kinds, inits):
    return tuple(AgentSpec(tuple(float(v) for v in init), tag, tuple(sorted(params.items())))
                 for (tag, params), init in zip(kinds, inits))


SIGN = ('sign', {})
LIPSCHITZ = ('lipschitz', {'gain': 1.})
SIGN_C = ('sign_c', {})

K3_INITS = ((0.9, 0.3, -0.2), (-0.4, 0.8, 0.1), (0.2, -0.5, 0.7))


@add_scenario
class Example1Sliding(Builtin):
    name = 'example1-sliding'
    description = 'complete graph on three agents, every agent on sign (sliding consensus possible)'

    def build(self):
        return ScenarioFile(name=self.name, agents=_agents([SIGN] * 3, K3_INITS), edges=_edges(complete_graph(3)),
                            protocol=1, integrator=IntegratorConfig(h=1e-3, t_max=5.))


@add_scenario
class Example1SlidingAnalytic(Builtin):
    name = 'example1-sliding-analytic'
    description = 'closed-form sliding consensus from ||xbar|| = 3 at rate 0.5, certified against the inclusion'

    def build(self):
        return ScenarioFile(name=self.name, agents=_agents([SIGN] * 3, [(3., 0., 0.)] * 3),
                            edges=_edges(complete_graph(3)), protocol=1,
                            integrator=IntegratorConfig(h=1e-3, t_max=1.),
                            analytic=SlidingSpec(xbar=(3., 0., 0.), eps1=0.5, t0=0., samples=100))


@add_scenario
class Example2FTC(Builtin):
    name = 'example2-ftc'
    description = 'path 1-2-3, agent 1 Lipschitz, agents 2 and 3 on sign (finite-time consensus)'

    def build(self):
        return ScenarioFile(name=self.name, agents=_agents([LIPSCHITZ, SIGN, SIGN],
                                                           [(0.5, 0., 0.), (0., 0.5, 0.), (0., 0., 0.5)]),
                            edges=_edges(path_graph(3)), protocol=1, integrator=IntegratorConfig(h=1e-3, t_max=5.))


@add_scenario
class Example2Asymptotic(Builtin):
    name = 'example2-asymptotic'
    description = 'path 1-2-3, agents 1 and 3 Lipschitz, x1(0) = -x3(0), x2(0) = 0 (exponential decay only)'

    def build(self):
        return ScenarioFile(name=self.name, agents=_agents([LIPSCHITZ, SIGN, LIPSCHITZ],
                                                           [(1., 0., 0.), (0., 0., 0.), (-1., 0., 0.)]),
                            edges=_edges(path_graph(3)), protocol=1,
                            integrator=IntegratorConfig(h=5e-5, t_max=5., record_every=200))


@add_scenario
class Protocol2Path(Builtin):
    name = 'protocol2-path'
    description = 'path 1-2-3 under the componentwise protocol, sum ||x_i(0)||^2 < pi^2'

    def build(self):
        return ScenarioFile(name=self.name, agents=_agents([SIGN_C] * 3,
                                                           [(0.8, -0.3, 0.2), (-0.5, 0.6, 0.1), (0.3, 0.4, -0.9)]),
                            edges=_edges(path_graph(3)), protocol=2, integrator=IntegratorConfig(h=1e-3, t_max=10.))


builtin_names = sorted(_ALL_SCENARIOS.keys())


def get_builtin(name: str) -> ScenarioFile:
    if name not in _ALL_SCENARIOS:
        raise InvalidConfig('unknown builtin scenario {!r}, expected one of {}'.format(name, builtin_names))
    return _ALL_SCENARIOS[name]().build()
