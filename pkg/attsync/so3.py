"""
Rotation primitives in axis-angle coordinates: hat/vee, exponential and logarithm maps, the
Riemannian distance on SO(3), and the transition matrix L_x relating body angular velocity to the
axis-angle rate, x' = L_x w.

Axis-angle vectors are float arrays of shape (3,), rotations are (3, 3) arrays. All functions are
pure and return new arrays.

"""

from typing import Callable, NamedTuple, Tuple

import numpy as np

from attsync.errors import AngleNearPi, InvalidConfig, NotARotation, OutOfDomain
from attsync.settings import LOG_DELTA, REORTHONORMALIZE_EVERY, TAYLOR_THRESHOLD

ORTHOGONALITY_TOL = 1e-9
TWO_PI = 2 * np.pi


class TransitionMatrix(NamedTuple):
    m: np.ndarray     # L_x = sym + skew
    sym: np.ndarray   # symmetric part L^1_x
    skew: np.ndarray  # hat(x) / 2


def hat(p: np.ndarray) -> np.ndarray:
    """
    The skew matrix of p, so that hat(p) @ q == np.cross(p, q)

    :param p: array of shape (3,)
    :return: array of shape (3, 3)
    """
    p = np.asarray(p, dtype=float).reshape(3)
    return np.array([[0., -p[2], p[1]],
                     [p[2], 0., -p[0]],
                     [-p[1], p[0], 0.]])


def vee(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=float).reshape(3, 3)
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def as_rotation(m: np.ndarray, tol: float=ORTHOGONALITY_TOL) -> np.ndarray:
    """
    Checks the SO(3) invariants and returns m as a float (3, 3) array

    :param m: anything reshapeable to (3, 3), e.g. a row-major 9-tuple
    :param tol: bound on ||m m^T - I||_F and |det(m) - 1|
    :return: the rotation
    """
    m = np.asarray(m, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(m)):
        raise NotARotation('rotation has non-finite entries')
    orth = np.linalg.norm(m @ m.T - np.eye(3))
    if orth > tol:
        raise NotARotation('||R R^T - I||_F = {:.3e} exceeds {:.1e}'.format(orth, tol))
    det = np.linalg.det(m)
    if abs(det - 1.) > tol:
        raise NotARotation('det(R) = {!r} is not 1'.format(det))
    return m


def exp_map(p: np.ndarray) -> np.ndarray:
    """
    Rodrigues' formula, exp(hat(p)) = I + sin(t)/t hat(p) + (1 - cos(t))/t^2 hat(p)^2 with t = ||p||

    :param p: axis-angle vector, shape (3,)
    :return: rotation, shape (3, 3)
    """
    P = hat(p)
    theta = float(np.linalg.norm(p))
    if theta < TAYLOR_THRESHOLD:
        t2 = theta ** 2
        a = 1. - t2 / 6. + t2 ** 2 / 120.
        b = 0.5 - t2 / 24. + t2 ** 2 / 720.
    else:
        a = np.sin(theta) / theta
        b = (1. - np.cos(theta)) / theta ** 2
    return np.eye(3) + a * P + b * (P @ P)


def rotation_angle(R: np.ndarray) -> float:
    """
    The angle of R in [0, pi], from atan2 of the skew and trace parts (accurate at both ends)
    """
    s = 0.5 * np.linalg.norm(vee(R - R.T))
    c = 0.5 * (np.trace(R) - 1.)
    return float(np.arctan2(s, c))


def log_map(R: np.ndarray, delta: float=LOG_DELTA) -> np.ndarray:
    """
    The axis-angle vector of R, log(R) = t/(2 sin(t)) (R - R^T). log(I) is the zero vector.

    :param R: rotation, shape (3, 3)
    :param delta: angles at or above pi - delta are rejected
    :return: axis-angle vector of norm < pi
    """
    R = as_rotation(R)
    theta = rotation_angle(R)
    if theta >= np.pi - delta:
        raise AngleNearPi(theta, delta)
    if theta < TAYLOR_THRESHOLD:
        t2 = theta ** 2
        k = 0.5 * (1. + t2 / 6. + 7. * t2 ** 2 / 360.)
    else:
        k = theta / (2. * np.sin(theta))
    return k * vee(R - R.T)


def riemannian_distance(R1: np.ndarray, R2: np.ndarray, delta: float=LOG_DELTA) -> float:
    """
    d_R(R1, R2) = ||log(R1^T R2)||_F / sqrt(2), i.e. the norm of the relative axis-angle vector
    """
    return float(np.linalg.norm(log_map(np.asarray(R1).T @ np.asarray(R2), delta=delta)))


def transition_factor(theta):
    """
    sinc(t)/sinc(t/2)^2, which simplifies to (t/2) cot(t/2). This is the small eigenvalue of the
    symmetric part of L_x: positive below pi, zero at pi, negative on (pi, 2 pi).

    :param theta: scalar or array of angles in [0, 2 pi)
    """
    theta = np.asarray(theta, dtype=float)
    half = 0.5 * theta
    small = theta < TAYLOR_THRESHOLD
    safe = np.where(small, 1., half)
    t2 = theta ** 2
    out = np.where(small, 1. - t2 / 12. - t2 ** 2 / 720., safe / np.tan(safe))
    return out if out.ndim else float(out)


def _outer_coefficient(theta):
    # (1 - transition_factor(t)) / t^2
    theta = np.asarray(theta, dtype=float)
    small = theta < TAYLOR_THRESHOLD
    safe = np.where(small, 1., theta)
    t2 = theta ** 2
    return np.where(small,
                    1. / 12. + t2 / 720. + t2 ** 2 / 30240.,
                    (1. - transition_factor(safe)) / safe ** 2)


def _check_domain(norms, time=None):
    bad = np.flatnonzero(~(norms < TWO_PI))
    if len(bad):
        i = int(bad[0])
        raise OutOfDomain('agent {}: ||x|| = {!r} is outside the transition matrix domain [0, 2 pi)'
                          .format(i + 1, float(norms[i])),
                          agent=i, time=time)


def transition_matrix(x: np.ndarray) -> TransitionMatrix:
    """
    L_x = a I + (1 - a) x x^T / ||x||^2 + hat(x) / 2 with a = sinc(||x||)/sinc(||x||/2)^2,
    the form without a singularity at x = 0.

    :param x: axis-angle vector with ||x|| < 2 pi
    :return: TransitionMatrix(m, sym, skew)
    """
    x = np.asarray(x, dtype=float).reshape(3)
    theta = np.linalg.norm(x)
    _check_domain(np.array([theta]))
    sym = transition_factor(theta) * np.eye(3) + float(_outer_coefficient(theta)) * np.outer(x, x)
    skew = 0.5 * hat(x)
    return TransitionMatrix(sym + skew, sym, skew)


def transition_matrices(X: np.ndarray, time: float=None) -> np.ndarray:
    """
    L_{x_i} for every row of X, i.e. the diagonal blocks of blcdiag(L_{x_1}, ..., L_{x_n})

    :param X: array of shape (n, 3)
    :param time: reported in OutOfDomain when given
    :return: array of shape (n, 3, 3)
    """
    X = np.asarray(X, dtype=float)
    theta = np.linalg.norm(X, axis=1)
    _check_domain(theta, time=time)
    a = np.atleast_1d(transition_factor(theta))
    b = np.atleast_1d(_outer_coefficient(theta))
    L = a[:, None, None] * np.eye(3) + b[:, None, None] * X[:, :, None] * X[:, None, :]
    L[:, 0, 1] -= 0.5 * X[:, 2]
    L[:, 0, 2] += 0.5 * X[:, 1]
    L[:, 1, 0] += 0.5 * X[:, 2]
    L[:, 1, 2] -= 0.5 * X[:, 0]
    L[:, 2, 0] -= 0.5 * X[:, 1]
    L[:, 2, 1] += 0.5 * X[:, 0]
    return L


def rotation_kinematics_step(R: np.ndarray, omega: np.ndarray, h: float) -> np.ndarray:
    """
    R exp(h hat(w)), exact for a body-frame angular velocity held constant over the step
    """
    if not h > 0:
        raise InvalidConfig('step size must be positive, got {!r}'.format(h))
    return np.asarray(R, dtype=float) @ exp_map(h * np.asarray(omega, dtype=float))


def project_to_rotation(R: np.ndarray, max_iterations: int=20) -> np.ndarray:
    """
    The orthogonal polar factor of R by the Newton iteration R <- (R + R^{-T}) / 2
    """
    R = np.asarray(R, dtype=float)
    for _ in range(max_iterations):
        R_next = 0.5 * (R + np.linalg.inv(R).T)
        done = np.linalg.norm(R_next - R) < 1e-15
        R = R_next
        if done:
            break
    return R


def integrate_rotation(R0: np.ndarray, omega: Callable[[float], np.ndarray], h: float, t_max: float,
                       reorthonormalize_every: int=REORTHONORMALIZE_EVERY) -> Tuple[np.ndarray, np.ndarray]:
    """
    Geometric integration of R' = R hat(w(t)) with w sampled at the left end of each step.

    :return: times of shape (K+1,), rotations of shape (K+1, 3, 3)
    """
    steps = int(round(t_max / h))
    times = h * np.arange(steps + 1)
    Rs = np.empty((steps + 1, 3, 3))
    Rs[0] = R = as_rotation(R0)
    for k in range(steps):
        R = rotation_kinematics_step(R, omega(times[k]), h)
        if reorthonormalize_every and (k + 1) % reorthonormalize_every == 0:
            R = project_to_rotation(R)
        Rs[k + 1] = R
    return times, Rs


def integrate_axis_angle(x0: np.ndarray, omega: Callable[[float], np.ndarray], h: float,
                         t_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Explicit Euler on x' = L_x w(t) for a single body.

    :return: times of shape (K+1,), states of shape (K+1, 3)
    """
    steps = int(round(t_max / h))
    times = h * np.arange(steps + 1)
    xs = np.empty((steps + 1, 3))
    xs[0] = x = np.asarray(x0, dtype=float).reshape(3)
    for k in range(steps):
        x = x + h * transition_matrix(x).m @ np.asarray(omega(times[k]), dtype=float)
        xs[k + 1] = x
    return times, xs
