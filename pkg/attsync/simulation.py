"""
Explicit Euler integration of the closed loops

    x' = L_x f(-L_hat x)                         (protocol 1)
    x' = -L_x B_hat diag(w) sign_c(B_hat^T x)    (protocol 2)

The right-hand side is discontinuous, so the integrator realizes one particular Filippov solution:
in deadband mode sign arguments below SIGN_DEADBAND select the zero element, and arguments below
CHATTERING_FACTOR * h are scaled linearly to damp the O(h) switching around consensus. In smoothed
mode every sign is replaced by w / max(||w||, eps).

"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from attsync.analysis import lyapunov_channels
from attsync.controllers import ProtocolConfig, as_blocks, control
from attsync.errors import AngleNearPi, InvalidConfig, OutOfDomain
from attsync.settings import CHATTERING_FACTOR, REORTHONORMALIZE_EVERY, SIGN_DEADBAND
from attsync.so3 import exp_map, project_to_rotation, riemannian_distance, rotation_kinematics_step, \
    transition_matrices

logger = logging.getLogger(__name__)

MODES = ('deadband', 'smoothed')


@dataclass(frozen=True)
class StackedState:
    x: np.ndarray
    t: float = 0.

    @property
    def n(self):
        return np.asarray(self.x).size // 3


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 1e-3
    t_max: float = 10.
    mode: str = 'deadband'
    eps: Optional[float] = None
    record_every: int = 1
    reorthonormalize_rotations: bool = True
    track_rotations: bool = False
    stop_tolerance: Optional[float] = None
    event_tolerance: float = 1e-6

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidConfig('integrator h must be positive, got {!r}'.format(self.h))
        if not self.t_max > 0:
            raise InvalidConfig('integrator t_max must be positive, got {!r}'.format(self.t_max))
        if self.mode not in MODES:
            raise InvalidConfig('integrator mode must be one of {}, got {!r}'.format(MODES, self.mode))
        if self.mode == 'smoothed' and not (self.eps is not None and self.eps > 0):
            raise InvalidConfig('smoothed mode needs a positive eps')
        if int(self.record_every) < 1:
            raise InvalidConfig('record_every must be at least 1, got {!r}'.format(self.record_every))
        if self.stop_tolerance is not None and not self.stop_tolerance > 0:
            raise InvalidConfig('stop_tolerance must be positive')

    @property
    def steps(self):
        return int(round(self.t_max / self.h))

    @property
    def sign_parameters(self):
        """keyword arguments of controllers.control: eps in smoothed mode, else (deadband, soft)"""
        if self.mode == 'smoothed':
            return {'eps': self.eps}
        return {'deadband': SIGN_DEADBAND, 'soft': CHATTERING_FACTOR * self.h}


@dataclass
class SimResult:
    times: np.ndarray
    states: np.ndarray                       # (samples, 3n)
    channels: Dict[str, np.ndarray]
    events: List[Tuple[float, str]] = field(default_factory=list)
    t_max: float = None
    status: str = 'completed'
    message: str = ''

    @property
    def n(self):
        return self.states.shape[1] // 3

    def state(self, k):
        return StackedState(self.states[k], float(self.times[k]))

    def first_event(self, kind):
        for t, k in self.events:
            if k == kind:
                return t
        return None


def velocity(x: np.ndarray, cfg: ProtocolConfig, icfg: IntegratorConfig, t: float=None) -> np.ndarray:
    """
    L_x w(x), the selection of the Filippov set realized by the integrator
    """
    L = transition_matrices(as_blocks(x, cfg.n), time=t)
    W = control(x, cfg, **icfg.sign_parameters).reshape(cfg.n, 3)
    return np.einsum('nij,nj->ni', L, W).reshape(-1)


def step(state: StackedState, cfg: ProtocolConfig, icfg: IntegratorConfig) -> StackedState:
    """
    One explicit Euler step, x + h L_x w(x). Raises OutOfDomain if some ||x_i|| >= 2 pi.
    """
    x = np.asarray(state.x, dtype=float)
    return StackedState(x + icfg.h * velocity(x, cfg, icfg, t=state.t), state.t + icfg.h)


def _edge_disagreement(X, cfg):
    i, j, _ = cfg.edge_arrays
    if not len(i):
        return 0.
    return float(np.max(np.linalg.norm(X[i] - X[j], axis=1)))


def _record(rec, t, x, cfg, extra=None):
    X = as_blocks(x, cfg.n)
    ch = lyapunov_channels(x, cfg.topology)
    norms = np.linalg.norm(X, axis=1)
    rec['t'].append(t)
    rec['x'].append(np.array(x, dtype=float))
    rec['V1'].append(ch.V1)
    rec['V2'].append(ch.V2)
    rec['V3'].append(ch.V3)
    rec['disagreement'].append(ch.disagreement)
    rec['max_norm'].append(float(norms.max()))
    for i, v in enumerate(norms):
        rec['norm_{}'.format(i + 1)].append(float(v))
    for k, v in (extra or {}).items():
        rec[k].append(v)


def simulate(x0, cfg: ProtocolConfig, icfg: IntegratorConfig) -> SimResult:
    """
    Runs the closed loop from x0 until t_max, until the disagreement drops below stop_tolerance, or
    until the state leaves the transition-matrix domain (recorded as an 'out_of_domain' event).

    :param x0: stacked initial state of size 3n, or a StackedState
    :return: SimResult with channels V1, V2, V3, disagreement, max_norm, norm_i (and rotation_gap
             when rotations are tracked)
    """
    if isinstance(x0, StackedState):
        x, t = np.array(x0.x, dtype=float), float(x0.t)
    else:
        x, t = np.array(x0, dtype=float), 0.
    if x.size != 3 * cfg.n:
        raise InvalidConfig('initial state has {} entries, expected {}'.format(x.size, 3 * cfg.n))
    if not np.all(np.isfinite(x)):
        raise InvalidConfig('initial state has non-finite entries')
    transition_matrices(as_blocks(x, cfg.n), time=t)  # precondition at x0

    logger.debug('simulate: protocol {}, n={}, h={:g}, t_max={:g}, mode={}'.format(cfg.protocol, cfg.n, icfg.h,
                                                                                    icfg.t_max, icfg.mode))
    rec = {k: [] for k in ('t', 'x', 'V1', 'V2', 'V3', 'disagreement', 'max_norm')}
    rec.update({'norm_{}'.format(i + 1): [] for i in range(cfg.n)})
    rotations = None
    if icfg.track_rotations:
        rotations = [exp_map(xi) for xi in as_blocks(x, cfg.n)]
        rec['rotation_gap'] = []

    def rotation_gap():
        if rotations is None:
            return None
        gaps = []
        for xi, R in zip(as_blocks(x, cfg.n), rotations):
            try:
                gaps.append(riemannian_distance(exp_map(xi), R))
            except AngleNearPi:
                # the relative rotation is within LOG_DELTA of a half turn
                gaps.append(np.pi)
                if not any(kind == 'rotation_gap_near_pi' for _, kind in events):
                    events.append((t, 'rotation_gap_near_pi'))
                    logger.info('rotation gap reached pi at t={:.6g}'.format(t))
        return {'rotation_gap': max(gaps)}

    events = []
    status, message = 'completed', ''
    tol = icfg.event_tolerance
    crossed = np.max(np.linalg.norm(as_blocks(x, cfg.n), axis=1)) >= np.pi
    converged = _edge_disagreement(as_blocks(x, cfg.n), cfg) < tol
    if converged:
        events.append((t, 'consensus'))
    if crossed:
        events.append((t, 'pi_crossing'))

    _record(rec, t, x, cfg, rotation_gap())
    t0 = t
    signs = icfg.sign_parameters
    for k in range(1, icfg.steps + 1):
        try:
            L = transition_matrices(as_blocks(x, cfg.n), time=t)
        except OutOfDomain as e:
            events.append((t, 'out_of_domain'))
            status, message = 'out_of_domain', str(e)
            logger.info('out of domain at t={:.6g}: {}'.format(t, e))
            break
        W = control(x, cfg, **signs).reshape(cfg.n, 3)
        x = x + icfg.h * np.einsum('nij,nj->ni', L, W).reshape(-1)
        if rotations is not None:
            rotations = [rotation_kinematics_step(R, w, icfg.h) for R, w in zip(rotations, W)]
            if icfg.reorthonormalize_rotations and k % REORTHONORMALIZE_EVERY == 0:
                rotations = [project_to_rotation(R) for R in rotations]
        t = t0 + k * icfg.h

        X = as_blocks(x, cfg.n)
        dis = _edge_disagreement(X, cfg)
        if not converged and dis < tol:
            converged = True
            events.append((t, 'consensus'))
            logger.info('consensus (disagreement < {:g}) at t={:.6g}'.format(tol, t))
        if not crossed and np.max(np.linalg.norm(X, axis=1)) >= np.pi:
            crossed = True
            events.append((t, 'pi_crossing'))
            logger.info('max ||x_i|| crossed pi at t={:.6g}'.format(t))

        stop = icfg.stop_tolerance is not None and dis < icfg.stop_tolerance
        if k % icfg.record_every == 0 or k == icfg.steps or stop:
            _record(rec, t, x, cfg, rotation_gap())
        if stop:
            break

    channels = {k: np.array(v) for k, v in rec.items() if k not in ('t', 'x')}
    return SimResult(times=np.array(rec['t']), states=np.array(rec['x']), channels=channels, events=events,
                     t_max=t0 + icfg.steps * icfg.h, status=status, message=message)
