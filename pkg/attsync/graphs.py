"""
Undirected weighted communication graphs: Laplacian and incidence views, connectivity and the
algebraic connectivity lambda_2.

Nodes are 0-based internally. Scenario files use 1-based agent indices and go through
from_edge_list.

"""

from collections import deque
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import networkx as nx
import numpy as np

from attsync.errors import Disconnected, NotSymmetric, TopologyError

Edge = Tuple[int, int, float]


@dataclass(frozen=True)
class Topology:
    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        if int(self.n) < 1:
            raise TopologyError('a graph needs at least one node, got n={}'.format(self.n))
        edges = tuple((int(i), int(j), float(w)) for i, j, w in self.edges)
        seen = set()
        for i, j, w in edges:
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise TopologyError('edge ({}, {}) refers to a node outside 0..{}'.format(i, j, self.n - 1))
            if i == j:
                raise TopologyError('self-loop at node {}'.format(i))
            if not w > 0:
                raise TopologyError('edge ({}, {}) has non-positive weight {!r}'.format(i, j, w))
            key = (min(i, j), max(i, j))
            if key in seen:
                raise TopologyError('duplicate edge ({}, {})'.format(i, j))
            seen.add(key)
        object.__setattr__(self, 'edges', edges)

    @property
    def m(self):
        return len(self.edges)


def from_edge_list(n: int, edges: Sequence[Sequence[float]]) -> Topology:
    """
    Builds a Topology from 1-based [i, j] or [i, j, w] entries (weight defaults to 1)
    """
    converted = []
    for e in edges:
        if len(e) not in (2, 3):
            raise TopologyError('edge {!r} must be [i, j] or [i, j, w]'.format(e))
        w = e[2] if len(e) == 3 else 1.
        converted.append((int(e[0]) - 1, int(e[1]) - 1, float(w)))
    return Topology(n, tuple(converted))


def from_networkx(G, weight: str='weight') -> Topology:
    """
    Builds a Topology from a networkx graph on nodes 0..n-1, edges in G.edges() order. Missing
    weights default to 1.
    """
    n = G.number_of_nodes()
    if sorted(G.nodes()) != list(range(n)):
        raise TopologyError('networkx graph nodes must be 0..{}'.format(n - 1))
    return Topology(n, tuple((i, j, float(d.get(weight, 1.))) for i, j, d in G.edges(data=True)))


def _unit_graph(G, weight):
    nx.set_edge_attributes(G, float(weight), 'weight')
    return from_networkx(G)


def path_graph(n: int, weight: float=1.) -> Topology:
    return _unit_graph(nx.path_graph(n), weight)


def complete_graph(n: int, weight: float=1.) -> Topology:
    return _unit_graph(nx.complete_graph(n), weight)


def cycle_graph(n: int, weight: float=1.) -> Topology:
    return _unit_graph(nx.cycle_graph(n), weight)


def star_graph(n: int, weight: float=1.) -> Topology:
    """node 0 is the hub, n - 1 leaves"""
    return _unit_graph(nx.star_graph(n - 1), weight)


def adjacency(T: Topology) -> np.ndarray:
    A = np.zeros((T.n, T.n))
    for i, j, w in T.edges:
        A[i, j] = A[j, i] = w
    return A


def degrees(T: Topology) -> np.ndarray:
    return adjacency(T).sum(axis=1)


def neighbors(T: Topology) -> List[List[Tuple[int, float]]]:
    """
    Adjacency lists, nbrs[i] = [(j, w_ij), ...] in edge order
    """
    nbrs = [[] for _ in range(T.n)]
    for i, j, w in T.edges:
        nbrs[i].append((j, w))
        nbrs[j].append((i, w))
    return nbrs


def laplacian(T: Topology) -> np.ndarray:
    """
    L = D - A, symmetric with zero row sums
    """
    A = adjacency(T)
    return np.diag(A.sum(axis=1)) - A


def incidence(T: Topology) -> np.ndarray:
    """
    The n x m incidence matrix for unit weights. Edge k listed as (i, j) gets +1 in row i and -1 in
    row j, so the orientation follows the listing order.
    """
    B = np.zeros((T.n, T.m))
    for k, (i, j, _) in enumerate(T.edges):
        B[i, k] = 1.
        B[j, k] = -1.
    return B


def connected_components(T: Topology) -> List[List[int]]:
    nbrs = neighbors(T)
    label = [-1] * T.n
    components = []
    for start in range(T.n):
        if label[start] >= 0:
            continue
        label[start] = len(components)
        component = [start]
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j, _ in nbrs[i]:
                if label[j] < 0:
                    label[j] = label[start]
                    component.append(j)
                    queue.append(j)
        components.append(sorted(component))
    return components


def is_connected(T: Topology) -> bool:
    return len(connected_components(T)) == 1


def symmetric_eigenvalues(M: np.ndarray, tol: float=1e-12, max_sweeps: int=100) -> np.ndarray:
    """
    All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.

    :param M: square symmetric matrix (asymmetry above 1e-12 is rejected)
    :param tol: sweeps stop once the off-diagonal Frobenius norm is below tol * max(1, ||M||_F)
    :param max_sweeps: safety bound on the number of sweeps
    :return: sorted array of eigenvalues
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSymmetric('expected a square matrix, got shape {}'.format(A.shape))
    if A.size and np.max(np.abs(A - A.T)) > 1e-12:
        raise NotSymmetric('matrix is not symmetric (max |M - M^T| = {:.3e})'.format(np.max(np.abs(A - A.T))))
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    threshold = tol * max(1., np.linalg.norm(A))

    def off_norm(A):
        return np.sqrt(max(np.sum(A ** 2) - np.sum(np.diag(A) ** 2), 0.))

    for _ in range(max_sweeps):
        if off_norm(A) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.:
                    continue
                tau = (A[q, q] - A[p, p]) / (2. * A[p, q])
                t = (1. if tau >= 0 else -1.) / (abs(tau) + np.sqrt(1. + tau ** 2))
                c = 1. / np.sqrt(1. + t ** 2)
                s = t * c
                J = np.array([[c, s], [-s, c]])
                A[:, [p, q]] = A[:, [p, q]] @ J
                A[[p, q], :] = J.T @ A[[p, q], :]
                A[p, q] = A[q, p] = 0.
    return np.sort(np.diag(A))


def algebraic_connectivity(T: Topology) -> float:
    """
    lambda_2, the second smallest Laplacian eigenvalue. Positive exactly when T is connected.
    """
    if T.n < 2:
        raise TopologyError('lambda_2 needs at least two nodes')
    if not is_connected(T):
        raise Disconnected('graph has {} connected components'.format(len(connected_components(T))))
    return float(symmetric_eigenvalues(laplacian(T))[1])
