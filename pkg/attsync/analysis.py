"""
Lyapunov monitors and convergence diagnostics:

    V1 = max_i ||x_i||^2            (invariance of S_1(C))
    V2 = sqrt(x^T L_hat x)          (finite-time convergence rate)
    V3 = x^T x / 2                  (invariance of S_2(C) under protocol 2)

together with the rate constants c1 and lambda_2, the settling-time bound derived from them, and a
classifier telling finite-time from exponential decay in a simulated trace.

"""

import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from attsync.errors import InsufficientHorizon, OutOfDomain
from attsync.graphs import Topology, algebraic_connectivity, symmetric_eigenvalues
from attsync.so3 import transition_factor, transition_matrix

logger = logging.getLogger(__name__)

FIT_RESIDUAL = 0.1


class LyapunovChannels(NamedTuple):
    V1: float
    V2: float
    V3: float
    disagreement: float


class RateConstants(NamedTuple):
    c1: float
    lambda2: float
    slope_bound: float
    settling_bound: float

    def as_dict(self):
        return dict(self._asdict())


class Convergence(NamedTuple):
    label: str                   # 'finite_time', 'asymptotic' or 'none'
    T_c: Optional[float] = None
    slope: Optional[float] = None
    residual: Optional[float] = None

    def as_dict(self):
        return dict(self._asdict())


def lyapunov_channels(x, T: Topology) -> LyapunovChannels:
    X = np.asarray(x, dtype=float).reshape(T.n, 3)
    sq = np.sum(X ** 2, axis=1)
    if T.edges:
        i = np.array([e[0] for e in T.edges])
        j = np.array([e[1] for e in T.edges])
        w = np.array([e[2] for e in T.edges])
        d2 = np.sum((X[i] - X[j]) ** 2, axis=1)
        # x^T L_hat x as a sum over edges, nonnegative by construction
        V2, dis = np.sqrt(np.sum(w * d2)), np.sqrt(np.max(d2))
    else:
        V2, dis = 0., 0.
    return LyapunovChannels(V1=float(np.max(sq)), V2=float(V2), V3=float(0.5 * np.sum(sq)), disagreement=float(dis))


def c1_bound(C: float) -> float:
    """
    c1 = min over ||x|| <= C of the smallest eigenvalue of the symmetric part of L_x. That eigenvalue
    is (t/2) cot(t/2) at t = ||x||, decreasing in t, so the minimum sits on the sphere ||x|| = C.

    :param C: ball radius in (0, pi)
    """
    if not 0 < C < np.pi:
        raise OutOfDomain('c1 needs a radius in (0, pi), got {!r}'.format(C))
    return transition_factor(C)


def sampled_c1(C: float, directions: int=200, radii: int=50, seed: int=0) -> float:
    """
    c1 by brute force: the smallest Jacobi eigenvalue of sym(L_x) over random directions and the radii
    C/radii, 2C/radii, ..., C.
    """
    if not 0 < C < np.pi:
        raise OutOfDomain('c1 needs a radius in (0, pi), got {!r}'.format(C))
    rng = np.random.RandomState(seed)
    U = rng.randn(directions, 3)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    lowest = np.inf
    for r in np.linspace(C / radii, C, radii):
        for u in U:
            lowest = min(lowest, symmetric_eigenvalues(transition_matrix(r * u).sym)[0])
    return float(lowest)


def rate_constants(x0, T: Topology) -> RateConstants:
    """
    c1 from the initial max norm, lambda_2 of T, and the resulting bound on dV2/dt and on the settling
    time V2(0) / |slope|. With two agents the slope bound is -c1 sqrt(lambda_2 / 2), which is -c1 for a
    unit edge.
    """
    X = np.asarray(x0, dtype=float).reshape(T.n, 3)
    lambda2 = algebraic_connectivity(T)
    radius = float(np.max(np.linalg.norm(X, axis=1)))
    if not radius < np.pi:
        raise OutOfDomain('rate constants need max ||x_i(0)|| < pi, got {!r}'.format(radius))
    c1 = transition_factor(radius)
    if T.n == 2:
        slope = -c1 * np.sqrt(lambda2 / 2.)
    else:
        slope = -c1 * np.sqrt(lambda2) / 2.
    V2 = lyapunov_channels(X, T).V2
    return RateConstants(c1=float(c1), lambda2=lambda2, slope_bound=float(slope), settling_bound=float(V2 / -slope))


def classify_convergence(result, tol: float, min_horizon: float=None) -> Convergence:
    """
    finite_time(T_c) when the disagreement drops below tol at T_c < t_max and stays below 2 tol;
    asymptotic when V2 is still above tol at the end and log V2 is fit by a decreasing line with RMS
    residual below 0.1; none otherwise.

    :param result: anything with times, t_max and channels['disagreement'], channels['V2']
    :param min_horizon: raise InsufficientHorizon if the trace ends before it
    """
    times = np.asarray(result.times, dtype=float)
    if len(times) < 2:
        raise InsufficientHorizon('a trace with {} samples cannot be classified'.format(len(times)))
    t_max = result.t_max if result.t_max is not None else times[-1]
    if min_horizon is not None and t_max < min_horizon:
        raise InsufficientHorizon('trace ends at {:.6g}, before the required horizon {:.6g}'
                                  .format(t_max, min_horizon))

    dis = np.asarray(result.channels['disagreement'], dtype=float)
    suffix_max = np.maximum.accumulate(dis[::-1])[::-1]
    hits = np.flatnonzero((dis < tol) & (suffix_max < 2 * tol) & (times < t_max))
    if len(hits):
        return Convergence('finite_time', T_c=float(times[hits[0]]))

    V2 = np.asarray(result.channels['V2'], dtype=float)
    keep = V2 > 0
    if V2[-1] > tol and np.count_nonzero(keep) >= 3:
        fit = stats.linregress(times[keep], np.log(V2[keep]))
        resid = np.log(V2[keep]) - (fit.intercept + fit.slope * times[keep])
        rms = float(np.sqrt(np.mean(resid ** 2)))
        logger.debug('log V2 fit: slope {:.4g}, rms residual {:.3g}'.format(fit.slope, rms))
        if np.isfinite(fit.slope) and fit.slope < 0 and rms < FIT_RESIDUAL:
            return Convergence('asymptotic', slope=float(fit.slope), residual=rms)
    return Convergence('none')


def check_monotone(series, tol: float=1e-6) -> bool:
    """True when no sample exceeds its predecessor by more than tol."""
    series = np.asarray(series, dtype=float)
    return bool(np.all(np.diff(series) <= tol))


def sampled_slopes(times, series, floor: float=1e-3) -> np.ndarray:
    """
    Finite-difference slopes between consecutive samples, kept where both samples exceed floor
    """
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    slopes = np.diff(series) / np.diff(times)
    return slopes[(series[:-1] > floor) & (series[1:] > floor)]
