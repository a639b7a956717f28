"""Time-varying connectivity graph with add-hysteresis, and graph queries.

Edges appear when two agents come within ``r - delta`` of each other and
persist while the distance stays at or below ``r``.  The control design
guarantees existing edges are never stretched to ``r``; observing that is a
hard invariant violation, not a removal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ltlswarm.control import coeff_h
from ltlswarm.errors import EdgeLossError, ScenarioValidationError


@dataclass
class ConnectivityGraph:
    n_agents: int
    edges: set = field(default_factory=set)  # frozenset pairs of 0-based ids
    created_at: dict = field(default_factory=dict)  # edge -> (step, distance)

    def has_edge(self, i, j) -> bool:
        return frozenset((i, j)) in self.edges

    def neighbors(self, i) -> list:
        return sorted(j for j in range(self.n_agents)
                      if j != i and self.has_edge(i, j))

    def edge_list(self) -> list:
        """Edges as sorted (i, j) tuples with i < j, deterministic order."""
        return sorted(tuple(sorted(e)) for e in self.edges)


def _pair_distances(positions):
    x = np.asarray(positions, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def init_graph(positions, r: float) -> ConnectivityGraph:
    """Initial graph: an edge wherever the starting distance is below ``r``.

    Raises when the result is disconnected; the scheme assumes a connected
    start.
    """
    x = np.asarray(positions, dtype=float)
    n = len(x)
    dist = _pair_distances(x)
    g = ConnectivityGraph(n_agents=n)
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] < r:
                e = frozenset((i, j))
                g.edges.add(e)
                g.created_at[e] = (0, float(dist[i, j]))
    if not is_connected(g):
        raise ScenarioValidationError(
            f"initial connectivity graph is disconnected (edges: {g.edge_list()})"
        )
    return g


def update_graph(g: ConnectivityGraph, positions, r: float, delta: float,
                 step: int = 0, time: float = 0.0):
    """Apply the hysteresis rule; returns the list of newly added edges.

    New edge iff distance <= r - delta; existing edges must stay <= r, a
    violation raises EdgeLossError.  The graph is mutated in place.
    """
    dist = _pair_distances(positions)
    added = []
    for i in range(g.n_agents):
        for j in range(i + 1, g.n_agents):
            e = frozenset((i, j))
            d = float(dist[i, j])
            if e in g.edges:
                if d > r:
                    raise EdgeLossError(time, (i, j), d)
            elif d <= r - delta:
                g.edges.add(e)
                g.created_at[e] = (step, d)
                added.append((i, j, d))
    return added


def is_connected(g: ConnectivityGraph) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    if g.n_agents <= 1:
        return True
    seen = {0}
    work = [0]
    while work:
        i = work.pop()
        for j in g.neighbors(i):
            if j not in seen:
                seen.add(j)
                work.append(j)
    return len(seen) == g.n_agents


def is_complete(g: ConnectivityGraph) -> bool:
    return len(g.edges) == g.n_agents * (g.n_agents - 1) // 2


def laplacian(g: ConnectivityGraph, positions, r: float) -> np.ndarray:
    """Weighted Laplacian with the edge coefficients as weights.

    Diagonal entries are the sums of incident weights, off-diagonal entries
    are the negated weights, so rows sum to zero and the matrix is positive
    semidefinite.
    """
    x = np.asarray(positions, dtype=float)
    n = g.n_agents
    lap = np.zeros((n, n))
    for i, j in g.edge_list():
        d_sq = float(((x[i] - x[j]) ** 2).sum())
        w = coeff_h(d_sq, r)
        lap[i, i] += w
        lap[j, j] += w
        lap[i, j] -= w
        lap[j, i] -= w
    return lap


def eigenvalues_jacobi(mat: np.ndarray, tol: float = 1e-12,
                       max_sweeps: int = 100) -> np.ndarray:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    a = np.asarray(mat, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    a = a.copy()
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()
    for _ in range(max_sweeps):
        off = np.sqrt((a**2).sum() - (a.diagonal() ** 2).sum())
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(a.diagonal())


def lambda2(lap: np.ndarray) -> float:
    """Second-smallest Laplacian eigenvalue (algebraic connectivity)."""
    eig = eigenvalues_jacobi(lap)
    if len(eig) < 2:
        raise ValueError("lambda2 needs at least a 2-node graph")
    return float(eig[1])
