"""Offline trace verification, independent of the online monitors.

Reads the CSV artifacts a run produced and re-derives every checkable
claim: initial edges never stretch to the sensing radius, the potential
descends between discrete events, provided words are accepted (or follow
the plan), and every detection lines up with an actual goal-reach of the
observed agent within the detector window.
"""

from __future__ import annotations

import numpy as np

from ltlswarm.ltl import nfa_accepts, to_nnf, translate_cosafe_to_nfa
from ltlswarm.ltl.formula import is_syntactically_cosafe
from ltlswarm.network import init_graph
from ltlswarm.planner import plan_word
from ltlswarm.protocol import round_boundaries
from ltlswarm.scenario import Scenario, synthesize_all


def offline_verify(header, samples, events, scenario: Scenario) -> dict:
    """Re-check a recorded run; returns {ok, violations, info}."""
    violations = []
    info = {}
    n = len(scenario.missions)
    col = {name: k for k, name in enumerate(header)}
    starts = [m.start for m in scenario.missions]
    g0 = init_graph(starts, scenario.params.r)

    # (1) relative-distance maintenance on the initial edges
    worst = 0.0
    for i, j in g0.edge_list():
        d = samples[:, col[f"d_{i + 1}_{j + 1}"]]
        worst = max(worst, float(d.max()))
        if float(d.max()) >= scenario.params.r:
            violations.append(
                f"initial edge ({i + 1},{j + 1}) reached {d.max():.6f} m")
    info["max_initial_edge_distance"] = worst

    # (2) edge events only ever add edges below the hysteresis threshold
    for t, kind, _agent, payload in events:
        if kind == "edge_added":
            if payload["dist"] > scenario.params.r - scenario.params.delta:
                violations.append(
                    f"edge ({payload['i']},{payload['j']}) added at distance "
                    f"{payload['dist']} above r - delta")

    # (3) potential descent between consecutive samples without events
    event_times = sorted({t for t, kind, _a, _p in events})
    v = samples[:, col["V"]]
    hbound = samples[:, col["hbound"]]
    u_cols = [col[f"u_{i + 1}"] for i in range(n)]
    sum_u_sq = (samples[:, u_cols] ** 2).sum(axis=1)
    times = samples[:, col["t"]]
    ev_idx = 0
    descent_violations = 0
    for k in range(len(samples) - 1):
        t0, t1 = times[k], times[k + 1]
        while ev_idx < len(event_times) and event_times[ev_idx] <= t0:
            ev_idx += 1
        has_event = ev_idx < len(event_times) and t0 < event_times[ev_idx] <= t1
        if has_event:
            continue
        dt = t1 - t0
        tol = 1e-6 * (1.0 + abs(v[k])) + hbound[k] * sum_u_sq[k] * dt * dt
        if v[k + 1] > v[k] + tol:
            descent_violations += 1
            if descent_violations <= 3:
                violations.append(
                    f"potential rose by {v[k + 1] - v[k]:.3e} at t={t1:.3f}")
    info["descent_violations"] = descent_violations

    # (4) task verdicts from the recorded words
    plans = synthesize_all(scenario)
    words = {m.agent_id: [] for m in scenario.missions}
    provision_times = {m.agent_id: [] for m in scenario.missions}
    for t, kind, agent, payload in events:
        if kind == "goal_reached":
            words[agent].append(payload["services"])
            provision_times[agent].append(t)
    verdicts = {}
    for m in scenario.missions:
        letters = [frozenset(m.alphabet.atom_id(nm) for nm in w)
                   for w in words[m.agent_id]]
        nnf = to_nnf(m.formula)
        if is_syntactically_cosafe(nnf):
            ok = nfa_accepts(translate_cosafe_to_nfa(nnf), letters)
            verdicts[m.agent_id] = "satisfied" if ok else "not-yet-satisfied"
        else:
            expected = plan_word(plans[m.agent_id])
            k = len(expected.prefix)
            consistent = all(
                letter == (expected.prefix[idx] if idx < k
                           else expected.cycle[(idx - k) % len(expected.cycle)])
                for idx, letter in enumerate(letters))
            verdicts[m.agent_id] = (
                "consistent-progress" if consistent else "inconsistent")
    info["verdicts"] = verdicts
    for aid, verdict in verdicts.items():
        if verdict == "inconsistent":
            violations.append(f"agent {aid} word deviates from its plan")
    info["rounds"] = len(round_boundaries(provision_times))

    # (5) every detection must be explained by a recent provision
    window = scenario.detector.dt_window
    slack = 2.0 * window
    for t, kind, agent, payload in events:
        if kind != "detection":
            continue
        j = payload["observed"]
        near = [tp for tp in provision_times.get(j, []) if t - slack <= tp <= t + 1e-9]
        if not near:
            violations.append(
                f"detection of agent {j} by {agent} at t={t:.3f} matches no "
                f"goal-reach within {slack:.2f} s")

    # (6) count-vector agreement across simultaneous detections
    by_time = {}
    for t, kind, agent, payload in events:
        if kind == "detection":
            by_time.setdefault(t, []).append(tuple(payload["upsilon"]))
    for t, vecs in by_time.items():
        if len(set(vecs)) > 1:
            violations.append(f"count vectors disagree at t={t:.3f}: {set(vecs)}")

    return {"ok": not violations, "violations": violations, "info": info}
