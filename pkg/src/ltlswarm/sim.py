"""Deterministic fixed-step closed-loop simulation.

One step applies, in a fixed order: control inputs from the current modes
and goals, an explicit Euler update, the graph hysteresis rule, detector
buffer updates, goal-reach predicates with the protocol hooks, detector
queries feeding the round bookkeeping, then sampling plus the online
invariant monitors.  Time is an integer step count; all randomness comes
from per-agent generators seeded from (master seed, agent id), so equal
configurations yield byte-equal traces.

The per-step field computation is vectorized over the pair matrix; it
matches the per-agent functions in ``control`` (same formulas, associative
reordering only), which the test suite pins down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ltlswarm.control import ModeAssignment
from ltlswarm.errors import InvariantViolationError, PotentialDomainError
from ltlswarm.ltl import nfa_accepts, to_nnf, translate_cosafe_to_nfa
from ltlswarm.ltl.formula import is_syntactically_cosafe
from ltlswarm.network import init_graph, is_complete, update_graph
from ltlswarm.planner import plan_word
from ltlswarm.protocol import (
    AgentProtocolState,
    DetectorBuffer,
    fullltl_on_goal_reach,
    make_case_study_fprob,
    round_boundaries,
    round_update,
    scltl_on_goal_reach,
)
from ltlswarm.scenario import Scenario, synthesize_all
from ltlswarm.trace import EventTrace


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    horizon: float = 60.0          # simulated seconds
    seed: int = 0
    invariant_every: int = 1       # monitor cadence in steps; 0 disables
    settle_time: float = 1.0       # extra time after all agents turn passive

    def __post_init__(self):
        if self.dt <= 0 or self.horizon <= 0:
            raise ValueError("dt and horizon must be positive")


class World:
    """Mutable simulation state plus the per-step transition."""

    def __init__(self, scenario: Scenario, cfg: SimConfig, plans=None):
        self.scenario = scenario
        self.cfg = cfg
        self.params = scenario.params
        self.n = len(scenario.missions)
        self.plans = plans if plans is not None else synthesize_all(scenario)
        self.x = np.array([m.start for m in scenario.missions], dtype=float)
        self.graph = init_graph(self.x, self.params.r)
        self.initial_edges = self.graph.edge_list()
        self.adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.graph.edge_list():
            self.adj[i, j] = self.adj[j, i] = True
        self.step_count = 0
        self.trace = EventTrace(n_agents=self.n, dt=cfg.dt)
        self.regions = {
            m.agent_id: {reg.id: reg for reg in m.regions}
            for m in scenario.missions
        }
        self.proto = []
        for m in scenario.missions:
            plan = self.plans[m.agent_id]
            st = AgentProtocolState(agent_id=m.agent_id - 1, n_agents=self.n)
            st.goal_region = plan.step(1)[0]
            self.proto.append(st)
        self.rngs = [
            np.random.default_rng(np.random.SeedSequence((cfg.seed, m.agent_id)))
            for m in scenario.missions
        ]
        self.f_prob, self.f_cond = make_case_study_fprob(
            scenario.fprob.chi_bar, scenario.fprob.alpha)
        self.buffers = [DetectorBuffer(scenario.detector.dt_window)
                        for _ in range(self.n)]
        self.omega_prev = np.zeros((self.n, self.n), dtype=bool)
        self.inside_prev = [False] * self.n
        self.last_V = None
        self.last_hbound = 0.0
        self.last_sum_u_sq = 0.0
        self.events_last_step = False
        self.max_pair_distance = 0.0
        self.max_initial_edge_distance = 0.0

    # -- vectorized field computation -------------------------------------

    def goal_centers(self):
        centers = np.zeros((self.n, 2))
        active = np.zeros(self.n, dtype=bool)
        for i, (st, m) in enumerate(zip(self.proto, self.scenario.missions)):
            active[i] = st.active
            if st.active:
                centers[i] = self.regions[m.agent_id][st.goal_region].center
        return active, centers

    def mode_assignment(self) -> ModeAssignment:
        """Current modes in the form the ``control`` module functions take."""
        active, centers = self.goal_centers()
        radii = tuple(
            self.regions[m.agent_id][st.goal_region].radius
            for st, m in zip(self.proto, self.scenario.missions))
        return ModeAssignment(
            active=tuple(bool(a) for a in active),
            goal_centers=tuple(
                tuple(centers[i]) if active[i] else None for i in range(self.n)),
            goal_radii=radii,
        )

    def fields(self):
        """Inputs, potential, curvature bound, and pair distances at once.

        Same formulas as ``control.control_input``/``potential_V``; the edge
        sums are just reassociated for the matrix form.
        """
        p = self.params
        x = self.x
        diff = x[:, None, :] - x[None, :, :]
        dsq = (diff**2).sum(axis=2)
        gap = p.r**2 - dsq
        if np.any(gap[self.adj] <= 0):
            raise PotentialDomainError(
                f"edge at or beyond the sensing radius at "
                f"t={self.step_count * self.cfg.dt:.3f}")
        w = np.where(self.adj, p.r**2 / np.where(self.adj, gap, 1.0) ** 2, 0.0)
        u = -(w[:, :, None] * diff).sum(axis=1)

        active, centers = self.goal_centers()
        pvec = x - centers
        s = (pvec**2).sum(axis=1)
        d = p.eps**3 / (s + p.eps) ** 2 + p.eps**2 / (2.0 * (s + p.eps))
        u -= (active * d)[:, None] * pvec

        phi_c = np.where(self.adj, 0.5 * dsq / np.where(self.adj, gap, 1.0), 0.0)
        phi_g = 0.5 * p.eps**2 * s / (s + p.eps) \
            + 0.25 * p.eps**2 * np.log(s + p.eps)
        v = 0.5 * phi_c.sum() + float((active * phi_g).sum())

        # Gershgorin-style curvature bound: block operator norms
        d_prime_mag = 4.0 * p.eps**3 / (s + p.eps) ** 3 + p.eps**2 / (s + p.eps) ** 2
        h_prime = np.where(self.adj, 4.0 * p.r**2 / np.where(self.adj, gap, 1.0) ** 3, 0.0)
        edge_norm = w + h_prime * dsq
        row = active * (d + d_prime_mag * s) + 2.0 * edge_norm.sum(axis=1)
        hbound = float(row.max()) if self.n else 0.0
        return u, float(v), hbound, np.sqrt(dsq)

    # -- monitors ----------------------------------------------------------

    def _sample_and_monitor(self, u, v, hbound, dist):
        pairs = [float(dist[i, j]) for i in range(self.n)
                 for j in range(i + 1, self.n)]
        u_norms = [float(np.linalg.norm(u[i])) for i in range(self.n)]
        self.trace.add_sample(self.step_count, pairs, v, hbound, u_norms)
        if pairs:
            self.max_pair_distance = max(self.max_pair_distance, max(pairs))
        for i, j in self.initial_edges:
            dij = float(dist[i, j])
            self.max_initial_edge_distance = max(self.max_initial_edge_distance, dij)
            if dij >= self.params.r:
                raise InvariantViolationError(
                    f"initial edge ({i + 1},{j + 1}) stretched to {dij:.6f} m "
                    f">= r at t={self.step_count * self.cfg.dt:.3f}")
        # potential descent between consecutive samples, unless a discrete
        # event changed the potential's definition in between
        if self.last_V is not None and not self.events_last_step:
            window = max(1, self.cfg.invariant_every)
            tol = 1e-6 * (1.0 + abs(self.last_V)) \
                + window * self.last_hbound * self.last_sum_u_sq * self.cfg.dt**2
            if v > self.last_V + tol:
                raise InvariantViolationError(
                    f"potential increased by {v - self.last_V:.3e} "
                    f"(tol {tol:.3e}) at t={self.step_count * self.cfg.dt:.3f}")
        self.last_V = v
        self.last_hbound = hbound
        self.last_sum_u_sq = float((u**2).sum())

    # -- the step ----------------------------------------------------------

    def do_step(self):
        """Advance one dt; returns the list of events emitted."""
        cfg = self.cfg
        p = self.params
        u, v, hbound, dist = self.fields()

        if cfg.invariant_every and self.step_count % cfg.invariant_every == 0:
            self._sample_and_monitor(u, v, hbound, dist)

        events = []
        t_now = self.step_count * cfg.dt

        # (2) explicit Euler
        self.x = self.x + cfg.dt * u
        self.step_count += 1
        t_next = self.step_count * cfg.dt

        # (3) hysteresis rule on the new positions
        added = update_graph(self.graph, self.x, p.r, p.delta,
                             step=self.step_count, time=t_next)
        for i, j, dnew in added:
            self.adj[i, j] = self.adj[j, i] = True
            events.append(("edge_added", None,
                           {"i": i + 1, "j": j + 1, "dist": round(dnew, 9)}))

        # (4) detector buffers consume the inputs just applied
        if self.scenario.protocol == "fullltl":
            for j in range(self.n):
                self.buffers[j].append(t_now, u[j])

        # (5) goal-reach predicates and protocol hooks, ascending agent id
        for i, st in enumerate(self.proto):
            mission = self.scenario.missions[i]
            plan = self.plans[mission.agent_id]
            reg = self.regions[mission.agent_id][st.goal_region]
            inside = st.active and reg.contains(self.x[i])
            if self.scenario.protocol == "scltl":
                if inside and not self.inside_prev[i]:
                    events.extend(scltl_on_goal_reach(st, plan, t_next))
                    # the goal was re-assigned, so the agent counts as newly
                    # outside it; a same-region goal then fires again
                    self.inside_prev[i] = False
                else:
                    self.inside_prev[i] = inside
            else:
                st.waiting = inside
                if st.waiting and float(np.linalg.norm(u[i])) < self.scenario.detector.du:
                    events.extend(fullltl_on_goal_reach(
                        st, plan, t_next, self.rngs[i], self.f_prob, self.f_cond))

        # (6) reaching-event detection and round bookkeeping
        if self.scenario.protocol == "fullltl":
            fired = np.zeros((self.n, self.n), dtype=bool)
            for i in range(self.n):
                detections = set()
                for j in self.graph.neighbors(i):
                    hit, _witness = self.buffers[j].query(
                        t_now, u[j], self.scenario.detector.du,
                        self.scenario.detector.dd)
                    fired[i, j] = hit
                    if hit and not self.omega_prev[i, j]:
                        detections.add(j)
                events.extend(round_update(self.proto[i], detections, t_next))
            self.omega_prev = fired

        for kind, agent0, payload in events:
            agent = 0 if agent0 is None else agent0 + 1
            if kind == "goal_reached":
                alphabet = self.scenario.missions[agent0].alphabet
                payload = dict(payload)
                payload["services"] = sorted(
                    alphabet.name(a) for a in payload["services"])
            self.trace.add_event(self.step_count, kind, agent, payload)
        self.events_last_step = bool(events)
        return events


def run(scenario: Scenario, cfg: SimConfig, plans=None) -> EventTrace:
    """Simulate until the horizon (or, for the co-safe protocol, until all
    agents are passive plus the settle time); returns the complete trace."""
    world = World(scenario, cfg, plans=plans)
    n_steps = int(round(cfg.horizon / cfg.dt))
    settle_steps = int(round(cfg.settle_time / cfg.dt))
    stop_at = None
    for _ in range(n_steps):
        world.do_step()
        if scenario.protocol == "scltl" and stop_at is None:
            if all(not st.active for st in world.proto):
                stop_at = world.step_count + settle_steps
                world.trace.meta["all_passive_t"] = world.step_count * cfg.dt
        if stop_at is not None and world.step_count >= stop_at:
            break
    u, v, hbound, dist = world.fields()
    world._sample_and_monitor(u, v, hbound, dist)

    tr = world.trace
    tr.meta["final_positions"] = [list(map(float, row)) for row in world.x]
    tr.meta["max_pair_distance"] = world.max_pair_distance
    tr.meta["max_initial_edge_distance"] = world.max_initial_edge_distance
    tr.meta["steps"] = world.step_count
    tr.meta["graph_complete"] = is_complete(world.graph)
    tr.meta["edges"] = world.graph.edge_list()
    tr.meta["seed"] = cfg.seed
    tr.meta["protocol"] = scenario.protocol
    tr.meta["rounds_completed"] = min(
        (st.rounds_completed for st in world.proto), default=0)
    return tr


def satisfaction_report(trace: EventTrace, scenario: Scenario, plans=None) -> dict:
    """Per-agent verdicts recomputed from the trace alone.

    Co-safe tasks: the provided word must be accepted by the task's finite
    automaton.  General tasks: a finite trace cannot certify satisfaction of
    an infinite-horizon task, so the verdict is consistent-progress (the
    word follows the plan) plus the number of completed rounds.
    """
    plans = plans if plans is not None else synthesize_all(scenario)
    words = trace.words()
    boundaries = round_boundaries(trace.provision_times())
    report = {"rounds": len(boundaries), "agents": {}}
    for m in scenario.missions:
        word_names = words[m.agent_id]
        letters = [frozenset(m.alphabet.atom_id(nm) for nm in letter)
                   for letter in word_names]
        nnf = to_nnf(m.formula)
        if is_syntactically_cosafe(nnf):
            nfa = translate_cosafe_to_nfa(nnf)
            ok = nfa_accepts(nfa, letters)
            report["agents"][m.agent_id] = {
                "verdict": "satisfied" if ok else "not-yet-satisfied",
                "word": [list(w) for w in word_names],
            }
        else:
            expected = plan_word(plans[m.agent_id])
            consistent = True
            k = len(expected.prefix)
            for idx, letter in enumerate(letters):
                want = expected.prefix[idx] if idx < k \
                    else expected.cycle[(idx - k) % len(expected.cycle)]
                if letter != want:
                    consistent = False
                    break
            report["agents"][m.agent_id] = {
                "verdict": "consistent-progress" if consistent else "inconsistent",
                "provisions": len(letters),
                "rounds": len(boundaries),
                "note": "finite traces cannot certify infinite-horizon satisfaction",
            }
    return report
