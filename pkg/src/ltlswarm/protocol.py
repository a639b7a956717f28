"""Activity-switching protocols and the communication-free reaching detector.

Two protocols share the per-agent state: the co-safe one walks the finite
plan and turns the agent passive for good after its last service; the full
one wraps through the plan suffix forever, draws activity from a probability
function after each service, counts every agent's goal visits in a
per-round vector, and reactivates the agent when the whole team has made
progress.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ltlswarm.control import ControlParams, coeff_d
from ltlswarm.planner import DiscretePlan


def goal_force_magnitude(p_norm: float, eps: float) -> float:
    """Goal-term speed  f(|p|) = d(|p|^2) * |p|."""
    return coeff_d(p_norm * p_norm, eps) * p_norm


def delta_d(params: ControlParams) -> float:
    """Detector jump threshold  |f(r_min) - f(sqrt(0.4 eps))|."""
    return abs(
        goal_force_magnitude(params.r_min, params.eps)
        - goal_force_magnitude(math.sqrt(0.4 * params.eps), params.eps)
    )


@dataclass(frozen=True)
class DetectorParams:
    """Window length, small-input threshold, and jump threshold."""

    dt_window: float
    du: float
    dd: float

    def __post_init__(self):
        if min(self.dt_window, self.du, self.dd) <= 0:
            raise ValueError("detector parameters must be positive")
        if self.du >= self.dd:
            raise ValueError("need du < dd")

    @staticmethod
    def defaults(params: ControlParams, dt_window: float = 0.1,
                 du: float | None = None, dd: float | None = None):
        """Window 0.1 s; jump threshold from the control law; du = dd/10."""
        dd = delta_d(params) if dd is None else dd
        du = dd / 10.0 if du is None else du
        return DetectorParams(dt_window=dt_window, du=du, dd=dd)


class DetectorBuffer:
    """Ring buffer of (t, u) samples spanning the detector window.

    Samples are stored as plain floats and thresholds compared squared, so
    the per-step queries stay cheap inside the simulation loop.
    """

    def __init__(self, dt_window: float):
        self.dt_window = dt_window
        self.samples = deque()  # (t, ux, uy, |u|^2)

    def append(self, t: float, u):
        ux, uy = float(u[0]), float(u[1])
        self.samples.append((t, ux, uy, ux * ux + uy * uy))
        cutoff = t - self.dt_window
        while self.samples and self.samples[0][0] < cutoff:
            self.samples.popleft()

    def query(self, t: float, u_now, du: float, dd: float):
        """Reaching-event test: a near-zero sample in the window followed by
        a jump beyond ``dd`` at the current input.

        Returns (fired, witness_time); the earliest witness is reported.
        """
        nx, ny = float(u_now[0]), float(u_now[1])
        du_sq = du * du
        dd_sq = dd * dd
        lo = t - self.dt_window
        for t_prime, ux, uy, norm_sq in self.samples:
            if t_prime < lo or t_prime > t:
                continue
            if norm_sq < du_sq:
                dx = nx - ux
                dy = ny - uy
                if dx * dx + dy * dy > dd_sq:
                    return True, t_prime
        return False, None


@dataclass
class AgentProtocolState:
    """Hybrid-layer bookkeeping for one agent."""

    agent_id: int
    n_agents: int
    kappa: int = 1
    active: bool = True
    goal_region: str = ""
    word: list = field(default_factory=list)       # (t, frozenset) provisions
    upsilon: np.ndarray = None                      # per-agent reach counts
    chi: float = 0.0                                # current round start time
    waiting: bool = False
    rounds_completed: int = 0

    def __post_init__(self):
        if self.upsilon is None:
            self.upsilon = np.zeros(self.n_agents, dtype=int)


def make_case_study_fprob(chi_bar: float, alpha: float):
    """Probability/condition pair used by the case study.

    Staying active has probability exp(-alpha * Y[i] * (t - chi)) while
    Y[i] * (t - chi) < chi_bar, and zero afterwards, which forces every
    repeatedly-reaching agent passive eventually.
    """

    def f_cond(own_count: int, elapsed: float) -> bool:
        return own_count * elapsed < chi_bar

    def f_prob(own_count: int, elapsed: float) -> float:
        return math.exp(-alpha * own_count * elapsed)

    return f_prob, f_cond


def scltl_on_goal_reach(state: AgentProtocolState, plan: DiscretePlan, t: float):
    """Co-safe protocol step on a goal-reach event.

    Provides the pending services and advances; reaching the last step of a
    finite plan turns the agent passive for good.  Plans with a suffix are
    infinite, so the agent then stays active forever (index wraps).
    Returns a list of trace events.
    """
    if not state.active:
        return [("warning", state.agent_id,
                 {"reason": "goal-reach hook on passive agent"})]
    region_id, services = plan.step(state.kappa)
    state.word.append((t, services))
    events = [("goal_reached", state.agent_id,
               {"region": region_id, "services": sorted(services),
                "index": state.kappa})]
    if not plan.suffix and state.kappa == plan.big_k:
        state.active = False
        events.append(("mode_switch", state.agent_id,
                       {"mode": "passive", "reason": "plan complete"}))
    else:
        state.kappa = plan.next_index(state.kappa)
        state.goal_region = plan.step(state.kappa)[0]
    return events


def fullltl_on_goal_reach(state: AgentProtocolState, plan: DiscretePlan,
                          t: float, rng, f_prob, f_cond):
    """Full-LTL protocol service step; call once the agent sits in its goal
    region with a near-zero input (the waiting condition).

    Appends the services, counts the agent's own visit, advances the plan
    index with suffix wrap-around, then draws the next mode: active with
    probability ``f_prob`` when ``f_cond`` holds, passive otherwise.
    """
    region_id, services = plan.step(state.kappa)
    state.word.append((t, services))
    state.upsilon[state.agent_id] += 1
    events = [("goal_reached", state.agent_id,
               {"region": region_id, "services": sorted(services),
                "index": state.kappa,
                "upsilon": state.upsilon.tolist()})]
    state.kappa = plan.next_index(state.kappa)
    state.goal_region = plan.step(state.kappa)[0]
    own = int(state.upsilon[state.agent_id])
    elapsed = t - state.chi
    if f_cond(own, elapsed):
        stay_active = rng.random() < f_prob(own, elapsed)
    else:
        stay_active = False
    if stay_active != state.active:
        events.append(("mode_switch", state.agent_id,
                       {"mode": "active" if stay_active else "passive",
                        "reason": "post-service draw"}))
    state.active = stay_active
    state.waiting = False
    return events


def round_update(state: AgentProtocolState, detections, t: float):
    """Count detected neighbor reaches; on a full vector start a new round.

    ``detections`` holds agent ids j != i whose reaching events fired this
    step.  When every entry of the count vector is positive the vector
    resets, the round clock restarts, and the agent turns active.
    """
    events = []
    for j in sorted(detections):
        if j == state.agent_id:
            continue
        state.upsilon[j] += 1
        events.append(("detection", state.agent_id,
                       {"observed": j + 1, "upsilon": state.upsilon.tolist()}))
    if np.all(state.upsilon > 0):
        state.upsilon[:] = 0
        state.chi = t
        state.rounds_completed += 1
        if not state.active:
            events.append(("mode_switch", state.agent_id,
                           {"mode": "active", "reason": "round complete"}))
        state.active = True
        events.append(("round_complete", state.agent_id,
                       {"round": state.rounds_completed}))
    return events


def round_boundaries(provision_times: dict, horizon: float | None = None):
    """Round end times from per-agent provision timestamps.

    A boundary is the earliest time by which every agent's word has grown
    strictly since the previous boundary (round zero ends at t=0); agents
    that never provide again truncate the sequence.
    """
    out = []
    last = 0.0
    times = {i: sorted(ts) for i, ts in provision_times.items()}
    if not times:
        return out
    while True:
        firsts = []
        for ts in times.values():
            nxt = next((t for t in ts if t > last), None)
            if nxt is None:
                return out
            firsts.append(nxt)
        boundary = max(firsts)
        if horizon is not None and boundary > horizon:
            return out
        out.append(boundary)
        last = boundary
