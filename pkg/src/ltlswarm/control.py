"""Potential-field control laws, their derivatives, and design-parameter bounds.

All coefficient functions take *squared* distances so callers avoid needless
square roots; the docstrings state both forms.  Active agents feel a goal
attraction with coefficient ``d`` plus neighbor cohesion with coefficient
``h``; passive agents feel cohesion only.  Controls are exactly the negated
potential gradient, assembled from the same arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ltlswarm.errors import PotentialDomainError, ScenarioValidationError


@dataclass(frozen=True)
class ControlParams:
    """Scalar design constants shared by the whole team."""

    r: float          # sensing radius (m)
    delta: float      # hysteresis margin (m), 0 < delta < r
    eps: float        # goal-attraction design parameter
    c_max: float      # bound on region-center norms (m)
    r_min: float      # minimal region radius (m)
    n_agents: int

    def __post_init__(self):
        if not 0 < self.delta < self.r:
            raise ScenarioValidationError(
                f"need 0 < delta < r, got delta={self.delta}, r={self.r}")
        if self.eps <= 0:
            raise ScenarioValidationError(f"need eps > 0, got {self.eps}")
        if self.r_min <= 0 or self.c_max <= 0:
            raise ScenarioValidationError("r_min and c_max must be positive")
        if self.n_agents < 1:
            raise ScenarioValidationError("need at least one agent")


@dataclass(frozen=True)
class ModeAssignment:
    """Per-agent controller mode: ``active[i]`` with goal center/radius."""

    active: tuple            # N booleans
    goal_centers: tuple      # N entries: (x, y) for active agents, None else
    goal_radii: tuple = None  # optional, used by goal-reach predicates

    def __post_init__(self):
        for i, (a, c) in enumerate(zip(self.active, self.goal_centers)):
            if a and c is None:
                raise ScenarioValidationError(f"active agent {i} lacks a goal")

    @property
    def n_active(self):
        return sum(bool(a) for a in self.active)


def coeff_d(p_sq: float, eps: float) -> float:
    """Goal coefficient  d = eps^3/(|p|^2+eps)^2 + eps^2/(2(|p|^2+eps))."""
    s = p_sq + eps
    return eps**3 / s**2 + eps**2 / (2.0 * s)


def coeff_d_prime(p_sq: float, eps: float) -> float:
    """d' = -4 eps^3/(|p|^2+eps)^3 - eps^2/(|p|^2+eps)^2  (always negative)."""
    s = p_sq + eps
    return -4.0 * eps**3 / s**3 - eps**2 / s**2


def coeff_h(dist_sq: float, r: float) -> float:
    """Cohesion coefficient  h = r^2/(r^2-|x|^2)^2, defined for |x| < r."""
    gap = r * r - dist_sq
    if gap <= 0:
        raise PotentialDomainError(
            f"pair distance^2 {dist_sq} is not below the sensing radius^2 {r * r}")
    return r * r / (gap * gap)


def coeff_h_prime(dist_sq: float, r: float) -> float:
    """h' = 4 r^2/(r^2-|x|^2)^3  (always positive on the domain)."""
    gap = r * r - dist_sq
    if gap <= 0:
        raise PotentialDomainError(
            f"pair distance^2 {dist_sq} is not below the sensing radius^2 {r * r}")
    return 4.0 * r * r / gap**3


def potential_phi_c(dist_sq: float, r: float) -> float:
    """Edge potential  phi_c = |x|^2 / (2 (r^2 - |x|^2)); diverges at r."""
    gap = r * r - dist_sq
    if gap <= 0:
        raise PotentialDomainError(
            f"pair distance^2 {dist_sq} is not below the sensing radius^2 {r * r}")
    return 0.5 * dist_sq / gap


def potential_phi_g(p_sq: float, eps: float) -> float:
    """Goal potential  phi_g = (eps^2/2) |p|^2/(|p|^2+eps) + (eps^2/4) ln(|p|^2+eps)."""
    s = p_sq + eps
    return 0.5 * eps**2 * p_sq / s + 0.25 * eps**2 * math.log(s)


def _grad_block(i, x, neighbors, active, goal_center, r, eps):
    """Per-agent gradient block  b_i d_i p_i + sum_j h_ij x_ij."""
    g = np.zeros(2)
    if active:
        p = x[i] - np.asarray(goal_center, dtype=float)
        g += coeff_d(float(p @ p), eps) * p
    for j in neighbors:
        xij = x[i] - x[j]
        g += coeff_h(float(xij @ xij), r) * xij
    return g


def control_input(i, positions, neighbors, active, goal_center, r, eps):
    """Control law for one agent: the negated potential-gradient block.

    Active agents steer toward ``goal_center`` on top of the cohesion term;
    passive agents use cohesion only.  Any neighbor at distance >= r is a
    domain error.
    """
    x = np.asarray(positions, dtype=float)
    return -_grad_block(i, x, neighbors, active, goal_center, r, eps)


def _neighbor_lists(n, edges):
    nbrs = [[] for _ in range(n)]
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    return [sorted(v) for v in nbrs]


def grad_V(positions, edges, modes: ModeAssignment, params: ControlParams):
    """Stacked gradient of the team potential, shape (2N,)."""
    x = np.asarray(positions, dtype=float)
    n = len(x)
    nbrs = _neighbor_lists(n, edges)
    out = np.zeros(2 * n)
    for i in range(n):
        out[2 * i:2 * i + 2] = _grad_block(
            i, x, nbrs[i], modes.active[i], modes.goal_centers[i],
            params.r, params.eps)
    return out


def control_inputs(positions, edges, modes: ModeAssignment, params: ControlParams):
    """All control inputs, shape (N, 2); exactly ``-grad_V`` reshaped."""
    return -grad_V(positions, edges, modes, params).reshape(-1, 2)


def potential_V(positions, edges, modes: ModeAssignment, params: ControlParams) -> float:
    """Team potential: each undirected edge contributes phi_c once, plus the
    goal potential of every active agent."""
    x = np.asarray(positions, dtype=float)
    total = 0.0
    for i, j in edges:
        xij = x[i] - x[j]
        total += potential_phi_c(float(xij @ xij), params.r)
    for i in range(len(x)):
        if modes.active[i]:
            p = x[i] - np.asarray(modes.goal_centers[i], dtype=float)
            total += potential_phi_g(float(p @ p), params.eps)
    return total


def hessian_V(positions, edges, modes: ModeAssignment, params: ControlParams):
    """Analytic 2N x 2N Hessian of the team potential (symmetric)."""
    x = np.asarray(positions, dtype=float)
    n = len(x)
    hess = np.zeros((2 * n, 2 * n))
    eye = np.eye(2)
    for i in range(n):
        if modes.active[i]:
            p = x[i] - np.asarray(modes.goal_centers[i], dtype=float)
            s = float(p @ p)
            blk = coeff_d(s, params.eps) * eye \
                + coeff_d_prime(s, params.eps) * np.outer(p, p)
            hess[2 * i:2 * i + 2, 2 * i:2 * i + 2] += blk
    for i, j in edges:
        xij = x[i] - x[j]
        s = float(xij @ xij)
        blk = coeff_h(s, params.r) * eye \
            + coeff_h_prime(s, params.r) * np.outer(xij, xij)
        hess[2 * i:2 * i + 2, 2 * i:2 * i + 2] += blk
        hess[2 * j:2 * j + 2, 2 * j:2 * j + 2] += blk
        hess[2 * i:2 * i + 2, 2 * j:2 * j + 2] -= blk
        hess[2 * j:2 * j + 2, 2 * i:2 * i + 2] -= blk
    return hess


def goal_speed_limit(eps: float) -> float:
    """Largest possible goal-term speed  max_p d(p^2) * p  =~ 0.5505 eps^1.5.

    The maximizer solves |p|^2 = (2 sqrt(3) - 3) eps.  This caps how fast
    the group centroid can move, whatever the geometry.
    """
    s_star = (2.0 * math.sqrt(3.0) - 3.0) * eps
    return coeff_d(s_star, eps) * math.sqrt(s_star)


def xi(params: ControlParams) -> float:
    """Workspace constant  xi = r^2 N c_max."""
    return params.r**2 * params.n_agents * params.c_max


def r_S(eps: float, params: ControlParams) -> float:
    """Radius of the goal-center neighborhood where local minima live:
    r_S(eps) = sqrt(3 N eps) + sqrt((N-1) eps sqrt(eps) xi)."""
    n = params.n_agents
    return math.sqrt(3.0 * n * eps) + math.sqrt(
        (n - 1) * eps * math.sqrt(eps) * xi(params))


@dataclass(frozen=True)
class EpsilonBounds:
    """The analytic thresholds on the design parameter, plus their minimum."""

    xi: float
    e0: float
    e1: float
    e2: float
    e3: float
    e4: float
    e5: float
    e6: float
    e7: float
    e_min: float

    def as_dict(self):
        return {
            "xi": self.xi, "eps0": self.e0, "eps1": self.e1, "eps2": self.e2,
            "eps3": self.e3, "eps4": self.e4, "eps5": self.e5, "eps6": self.e6,
            "eps7": self.e7, "eps_min": self.e_min,
        }


def _solve_eps2(params: ControlParams, tol: float = 1e-9) -> float:
    """Bisection for r_S(eps2) = r_min; r_S is strictly increasing from 0."""
    target = params.r_min
    hi = 1e-6
    while r_S(hi, params) < target:
        hi *= 2.0
        if hi > 1e30:
            raise ScenarioValidationError("r_S never reaches r_min")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = r_S(mid, params)
        if abs(val - target) <= tol:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def epsilon_bounds(params: ControlParams) -> EpsilonBounds:
    """Evaluate every threshold literally; the single-agent case reports the
    thresholds that divide by (N-1) as infinite."""
    n = params.n_agents
    x = xi(params)
    r_sq = params.r**2
    if n >= 2:
        # equality case of (N-1) sqrt(e0^1.5 xi) = r - delta
        e0 = ((params.r - params.delta) ** 2 / ((n - 1) ** 2 * x)) ** (2.0 / 3.0)
        e5 = 0.8 * params.r_min**2 / (n - 1) ** 2
    else:
        e0 = math.inf
        e5 = math.inf
    e1 = min(e0, n / (0.1 * r_sq))
    e2 = _solve_eps2(params)
    e3 = 0.07 * params.r_min**2
    e4 = 4.1 / x**2
    e6 = min(e3, e4, e5)
    g_hat = 2.0 / params.r_min**2  # |g^| with g^ = -2/r_min^2
    half_b = n / (0.08 * r_sq)
    e7 = 0.5 * (math.sqrt(half_b**2 + 4.0 / (r_sq * g_hat)) - half_b)
    e_min = min(e1, e2, e6, e7)
    bounds = EpsilonBounds(x, e0, e1, e2, e3, e4, e5, e6, e7, e_min)
    for key, val in bounds.as_dict().items():
        if not (val > 0):
            raise ScenarioValidationError(f"threshold {key} is not positive: {val}")
    return bounds


#: Design-parameter bound quoted with the original case study; literal
#: evaluation of the thresholds does not reproduce it (eps4 = 4.1/xi^2 is
#: orders of magnitude smaller), so reports surface both numbers.
CASE_STUDY_QUOTED_EPS_MIN = 0.031
