"""
Certification of candidate velocities against the Filippov regularization of the closed loops, and
the closed-form Filippov solutions used as references: the sliding consensus on the complete graph
with every agent on sign, and the exponentially decaying solution of the path graph with two
Lipschitz end agents.

A velocity nu is admissible at x when nu_i = L_{x_i} w_i for a w_i in the set-valued control of
agent i. L_{x_i} is invertible on ||x_i|| < 2 pi, so w_i = L_{x_i}^{-1} nu_i is unique and
membership is a set inclusion test on w.

"""

import logging

import numpy as np
from scipy.optimize import linprog

from attsync.controllers import ProtocolConfig, as_blocks, disagreement
from attsync.errors import InvalidConfig
from attsync.simulation import StackedState
from attsync.so3 import transition_matrices

logger = logging.getLogger(__name__)


def _protocol1_residuals(X, N, L, cfg, tol):
    Y = disagreement(X.reshape(-1), cfg)
    W = np.linalg.solve(L, N[:, :, None])[:, :, 0]
    res = np.zeros(cfg.n)
    for i, kind in enumerate(cfg.kinds):
        y = Y[i]
        if not cfg.sign_mask[i]:
            res[i] = np.linalg.norm(N[i] - L[i] @ kind(y))
        elif np.linalg.norm(y) > tol:
            # unique selection, compared in velocity space
            res[i] = np.linalg.norm(N[i] - L[i] @ (y / np.linalg.norm(y)))
        else:
            res[i] = max(0., np.linalg.norm(W[i]) - 1.)
    return res


def _protocol2_residual(X, N, L, cfg, tol):
    """
    For each coordinate k, the smallest l1 mismatch || -B diag(w) s - W[:, k] ||_1 over edge signs s
    with s_e = sign(d_e) where |d_e| > tol and s_e in [-1, 1] otherwise, by linear programming.
    """
    W = np.linalg.solve(L, N[:, :, None])[:, :, 0]
    i, j, w = cfg.edge_arrays
    n, m = cfg.n, len(i)
    B = cfg.incidence
    D = X[i] - X[j]
    A_eq = np.hstack([-B * w[None, :], -np.eye(n), np.eye(n)])
    c = np.concatenate([np.zeros(m), np.ones(2 * n)])
    worst = 0.
    for k in range(3):
        bounds = []
        for e in range(m):
            d = D[e, k]
            if abs(d) > tol:
                # x_i - x_j > 0 makes w_i pull toward x_j: s_e = sign(x_i - x_j) in -B diag(w) s
                bounds.append((np.sign(d), np.sign(d)))
            else:
                bounds.append((-1., 1.))
        bounds += [(0., None)] * (2 * n)
        sol = linprog(c, A_eq=A_eq, b_eq=W[:, k], bounds=bounds, method='highs')
        if sol.status != 0:
            logger.debug('membership LP for coordinate {} ended with status {}: {}'.format(k, sol.status, sol.message))
            return np.inf
        worst = max(worst, float(sol.fun))
    return worst


def filippov_residual(x, nu, cfg: ProtocolConfig, tol: float=1e-9) -> float:
    """
    Distance of the candidate velocity nu from the Filippov set at x (0 inside the set).

    Protocol 1: for Lipschitz agents and sign agents with a nonzero argument the set is a single
    point and the residual is ||nu_i - L_{x_i} w_i||; for sign agents with ||-L_i x|| <= tol it is
    max(0, ||L_{x_i}^{-1} nu_i|| - 1). Protocol 2: the l1 mismatch of the best admissible edge signs.

    :param tol: arguments at or below tol are treated as lying on the discontinuity
    :return: the largest residual over agents (and coordinates)
    """
    X = as_blocks(x, cfg.n)
    N = as_blocks(nu, cfg.n)
    L = transition_matrices(X)
    if cfg.protocol == 1:
        return float(np.max(_protocol1_residuals(X, N, L, cfg, tol)))
    return _protocol2_residual(X, N, L, cfg, tol)


def filippov_membership(x, nu, cfg: ProtocolConfig, tol: float=1e-9) -> bool:
    return filippov_residual(x, nu, cfg, tol) <= tol


def _check_sliding(xbar, eps1):
    xbar = np.asarray(xbar, dtype=float).reshape(3)
    if not np.linalg.norm(xbar) > 0:
        raise InvalidConfig('the sliding trajectory needs xbar != 0')
    if not 0 < eps1 < 1:
        raise InvalidConfig('eps1 must lie in (0, 1), got {!r}'.format(eps1))
    return xbar


def sliding_consensus_trajectory(xbar, eps1: float, t0: float, t: float, n: int=3):
    """
    x(t) = 1_n kron ((t - t0) eps1 xbar/||xbar|| + xbar): every agent stays in consensus while the
    common attitude drifts away from the identity at rate eps1.

    :return: StackedState at time t
    """
    xbar = _check_sliding(xbar, eps1)
    eta = xbar + (t - t0) * eps1 * xbar / np.linalg.norm(xbar)
    return StackedState(np.tile(eta, n), float(t))


def sliding_consensus_velocity(xbar, eps1: float, n: int=3) -> np.ndarray:
    xbar = _check_sliding(xbar, eps1)
    return np.tile(eps1 * xbar / np.linalg.norm(xbar), n)


def sliding_crossing_time(xbar, eps1: float, t0: float=0.) -> float:
    """
    The time at which ||x_i(t)|| reaches pi, i.e. the trajectory leaves every S_1(C), C < pi
    """
    xbar = _check_sliding(xbar, eps1)
    return t0 + (np.pi - np.linalg.norm(xbar)) / eps1


def ex_ac1_trajectory(x1_0, t: float):
    """
    x1 = x1(0) e^{-t}, x2 = 0, x3 = -x1(0) e^{-t} on the path 1 - 2 - 3 with Lipschitz (gain 1) end
    agents and a sign agent in the middle. The middle argument x1 + x3 - 2 x2 vanishes identically.
    """
    x1 = np.asarray(x1_0, dtype=float).reshape(3) * np.exp(-t)
    return StackedState(np.concatenate([x1, np.zeros(3), -x1]), float(t))


def ex_ac1_velocity(x1_0, t: float) -> np.ndarray:
    return -ex_ac1_trajectory(x1_0, t).x
