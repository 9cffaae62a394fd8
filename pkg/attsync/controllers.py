"""
The two discontinuous consensus protocols and the check of which convergence guarantees a
configuration enjoys.

Protocol 1:  w_i = f_i(sum_{j in N_i} w_ij (x_j - x_i)), with f_i either the direction-preserving
             sign or a locally Lipschitz direction-preserving map (gain * y, optionally saturated).
Protocol 2:  w_i = sum_{j in N_i} w_ij sign_c(x_j - x_i).

States are stacked 3n-vectors; internally they are reshaped to (n, 3).

"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from attsync.errors import Disconnected, InvalidConfig
from attsync.graphs import Topology, connected_components, incidence, is_connected, laplacian
from attsync.settings import SIGN_DEADBAND

_ALL_CONTROLLER_KINDS = {}


def add_controller_kind(C):
    _ALL_CONTROLLER_KINDS.update({C.tag: C})
    return C


def sign_directional(w: np.ndarray, deadband: float=SIGN_DEADBAND, soft: float=0.) -> np.ndarray:
    """
    sign(w) = w / ||w||, and 0 for ||w|| below the deadband. With soft > 0 the output is
    w / max(||w||, soft), i.e. linear inside the ball of radius soft.

    Works row-wise on 2d input.
    """
    w = np.asarray(w, dtype=float)
    norm = np.linalg.norm(w, axis=-1, keepdims=True)
    out = w / np.maximum(norm, max(soft, np.finfo(float).tiny))
    return np.where(norm < deadband, 0., out)


def sign_componentwise(w: np.ndarray, deadband: float=SIGN_DEADBAND, soft: float=0.) -> np.ndarray:
    """
    sign_c(w) = [sign(w_1), ..., sign(w_k)], entries in {-1, 0, 1} (soft > 0 makes each entry
    linear in |w_k| < soft)
    """
    w = np.asarray(w, dtype=float)
    a = np.abs(w)
    out = w / np.maximum(a, max(soft, np.finfo(float).tiny))
    return np.where(a < deadband, 0., out)


def sign_smoothed(w: np.ndarray, eps: float) -> np.ndarray:
    return sign_directional(w, deadband=0., soft=eps)


def sign_componentwise_smoothed(w: np.ndarray, eps: float) -> np.ndarray:
    return sign_componentwise(w, deadband=0., soft=eps)


@add_controller_kind
@dataclass(frozen=True)
class SignDirectional:
    tag = 'sign'

    def __call__(self, y, deadband=SIGN_DEADBAND, soft=0.):
        return sign_directional(y, deadband=deadband, soft=soft)


@add_controller_kind
@dataclass(frozen=True)
class SignComponentwise:
    tag = 'sign_c'

    def __call__(self, y, deadband=SIGN_DEADBAND, soft=0.):
        return sign_componentwise(y, deadband=deadband, soft=soft)


@add_controller_kind
@dataclass(frozen=True)
class LipschitzDirectional:
    """
    f(y) = gain * y, rescaled to norm `saturation` when it would exceed it. Locally Lipschitz,
    f(0) = 0 and f(y)^T y = ||f(y)|| ||y||.
    """
    gain: float = 1.
    saturation: Optional[float] = None
    tag = 'lipschitz'

    def __post_init__(self):
        if not self.gain > 0:
            raise InvalidConfig('lipschitz gain must be positive, got {!r}'.format(self.gain))
        if self.saturation is not None and not self.saturation > 0:
            raise InvalidConfig('lipschitz saturation must be positive, got {!r}'.format(self.saturation))

    def __call__(self, y, deadband=None, soft=None):
        out = self.gain * np.asarray(y, dtype=float)
        if self.saturation is not None:
            norm = np.linalg.norm(out, axis=-1, keepdims=True)
            out = out * np.minimum(1., self.saturation / np.maximum(norm, np.finfo(float).tiny))
        return out


controller_kinds = sorted(_ALL_CONTROLLER_KINDS.keys())


def get_controller_kind(tag, **params):
    if tag not in _ALL_CONTROLLER_KINDS:
        raise InvalidConfig('unknown controller {!r}, expected one of {}'.format(tag, controller_kinds))
    try:
        return _ALL_CONTROLLER_KINDS[tag](**params)
    except TypeError as e:
        raise InvalidConfig('bad parameters for controller {!r}: {}'.format(tag, e))


@dataclass(frozen=True)
class ProtocolConfig:
    """
    protocol 1 takes one SignDirectional or LipschitzDirectional kind per agent; protocol 2 uses
    sign_c everywhere and takes kinds=None (or all SignComponentwise).
    """
    topology: Topology
    kinds: Optional[Tuple] = None
    protocol: int = 1

    def __post_init__(self):
        if self.protocol not in (1, 2):
            raise InvalidConfig('protocol must be 1 or 2, got {!r}'.format(self.protocol))
        if self.topology.n < 2:
            raise InvalidConfig('at least two agents are needed')
        if self.kinds is not None:
            object.__setattr__(self, 'kinds', tuple(self.kinds))
        if self.protocol == 1:
            if self.kinds is None or len(self.kinds) != self.topology.n:
                raise InvalidConfig('protocol 1 needs one controller per agent ({})'.format(self.topology.n))
            for i, k in enumerate(self.kinds):
                if not isinstance(k, (SignDirectional, LipschitzDirectional)):
                    raise InvalidConfig('agent {}: protocol 1 accepts sign or lipschitz controllers, '
                                        'not {!r}'.format(i + 1, getattr(k, 'tag', k)))
        elif self.kinds is not None and not all(isinstance(k, SignComponentwise) for k in self.kinds):
            raise InvalidConfig('protocol 2 uses sign_c for every agent and cannot be mixed with protocol 1')

    @property
    def n(self):
        return self.topology.n

    @property
    def lipschitz_agents(self):
        """I_c, the agents with a continuous direction-preserving controller"""
        if self.protocol == 2:
            return ()
        return tuple(i for i, k in enumerate(self.kinds) if isinstance(k, LipschitzDirectional))

    @cached_property
    def laplacian(self):
        return laplacian(self.topology)

    @cached_property
    def incidence(self):
        return incidence(self.topology)

    @cached_property
    def edge_arrays(self):
        i = np.array([e[0] for e in self.topology.edges], dtype=int)
        j = np.array([e[1] for e in self.topology.edges], dtype=int)
        w = np.array([e[2] for e in self.topology.edges], dtype=float)
        return i, j, w

    @cached_property
    def sign_mask(self):
        return np.array([isinstance(k, SignDirectional) for k in self.kinds])


def as_blocks(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    assert x.size == 3 * n, 'expected a stacked state of size {}, got {}'.format(3 * n, x.size)
    return x.reshape(n, 3)


def disagreement(x: np.ndarray, cfg: ProtocolConfig) -> np.ndarray:
    """
    -L_i x = sum_{j in N_i} w_ij (x_j - x_i) for every agent, shape (n, 3)
    """
    return -cfg.laplacian @ as_blocks(x, cfg.n)


def control_protocol1(x: np.ndarray, cfg: ProtocolConfig, deadband: float=SIGN_DEADBAND,
                      soft: float=0., eps: Optional[float]=None) -> np.ndarray:
    """
    Stacked w with w_i = f_i(-L_i x)

    :param deadband: sign arguments shorter than this map to 0
    :param soft: radius of the linear zone of the sign agents (0 for the exact sign)
    :param eps: when given, the sign agents use sign_smoothed(., eps) and deadband/soft are ignored
    """
    assert cfg.protocol == 1
    Y = disagreement(x, cfg)
    W = np.empty_like(Y)
    mask = cfg.sign_mask
    if eps is None:
        W[mask] = sign_directional(Y[mask], deadband=deadband, soft=soft)
    else:
        W[mask] = sign_smoothed(Y[mask], eps)
    for i in np.flatnonzero(~mask):
        W[i] = cfg.kinds[i](Y[i])
    return W.reshape(-1)


def control_protocol2(x: np.ndarray, cfg: ProtocolConfig, deadband: float=SIGN_DEADBAND,
                      soft: float=0., eps: Optional[float]=None) -> np.ndarray:
    """
    Stacked w with w_i = sum_{j in N_i} w_ij sign_c(x_j - x_i), evaluated edge by edge
    """
    assert cfg.protocol == 2
    X = as_blocks(x, cfg.n)
    i, j, w = cfg.edge_arrays
    if eps is None:
        S = sign_componentwise(X[j] - X[i], deadband=deadband, soft=soft)
    else:
        S = sign_componentwise_smoothed(X[j] - X[i], eps)
    S = w[:, None] * S
    W = np.zeros_like(X)
    np.add.at(W, i, S)
    np.add.at(W, j, -S)
    return W.reshape(-1)


def protocol2_stacked(x: np.ndarray, cfg: ProtocolConfig, deadband: float=SIGN_DEADBAND) -> np.ndarray:
    """
    The compact form -B_hat diag(w) sign_c(B_hat^T x), with B_hat = B kron I_3
    """
    B = np.kron(cfg.incidence, np.eye(3))
    _, _, w = cfg.edge_arrays
    return -B @ (np.repeat(w, 3) * sign_componentwise(B.T @ np.asarray(x, dtype=float), deadband=deadband))


def control(x: np.ndarray, cfg: ProtocolConfig, deadband: float=SIGN_DEADBAND, soft: float=0.,
            eps: Optional[float]=None) -> np.ndarray:
    if cfg.protocol == 1:
        return control_protocol1(x, cfg, deadband=deadband, soft=soft, eps=eps)
    return control_protocol2(x, cfg, deadband=deadband, soft=soft, eps=eps)


@dataclass(frozen=True)
class GuaranteeReport:
    invariance_s1: bool
    finite_time: bool
    asymptotic_only: bool
    sliding_risk: bool
    notes: str

    def as_dict(self):
        return {'invariance_s1': self.invariance_s1,
                'finite_time': self.finite_time,
                'asymptotic_only': self.asymptotic_only,
                'sliding_risk': self.sliding_risk,
                'notes': self.notes}


def guarantees(n: int, n_lipschitz: int, protocol: int=1) -> GuaranteeReport:
    """
    The guarantees as a function of |I|, |I_c| and the protocol (connectivity assumed)
    """
    if protocol == 2:
        return GuaranteeReport(invariance_s1=True, finite_time=True, asymptotic_only=False, sliding_risk=False,
                               notes='protocol 2: S_2(C) = {sum ||x_i||^2 < C}, C < 4 pi^2, is strongly invariant; '
                                     'for C < pi^2 it lies inside S_1(sqrt(C)), which gives invariance_s1; '
                                     'finite-time synchronization is local, it needs '
                                     'sum_i d_R(I, R_i(0))^2 < pi^2')
    k = n_lipschitz
    finite_time = (n > 2 and k == 1) or (n == 2 and k <= 1)
    invariance = (n == 2 and k == 0) or (n >= 2 and k >= 1)
    sliding_risk = n > 2 and k == 0
    asymptotic_only = k == n

    notes = []
    if finite_time:
        notes.append('finite-time consensus: |I| {} 2 and |I_c| = {}'.format('>' if n > 2 else '=', k))
    if invariance:
        notes.append('S_1(C) is strongly invariant for every C < pi')
    if sliding_risk:
        notes.append('all agents use sign on more than two agents: sliding consensus can leave S_1(C)')
    if asymptotic_only:
        notes.append('every agent is Lipschitz: the closed loop is Lipschitz, convergence is asymptotic only')
    if not (finite_time or asymptotic_only or sliding_risk):
        notes.append('|I_c| = {} > 1 on {} agents: no finite-time guarantee, asymptotic convergence only '
                     'is guaranteed'.format(k, n))
    return GuaranteeReport(invariance_s1=invariance, finite_time=finite_time, asymptotic_only=asymptotic_only,
                           sliding_risk=sliding_risk, notes='; '.join(notes))


def validate_guarantees(cfg: ProtocolConfig) -> GuaranteeReport:
    if not is_connected(cfg.topology):
        raise Disconnected('graph has {} connected components; every guarantee needs a connected graph'
                           .format(len(connected_components(cfg.topology))))
    return guarantees(cfg.n, len(cfg.lipschitz_agents), cfg.protocol)
