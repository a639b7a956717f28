"""Scenario files: schema, loading, and structural validation.

A scenario is JSON::

    {
      "name": "...",
      "params": {"r": 8.0, "delta": 0.5, "eps": 0.03, "c_max": 40.0, "r_min": 2.0},
      "protocol": "scltl" | "fullltl",
      "agents": [
        {"id": 1, "start": [x, y], "formula": "F (s11 & ...)",
         "regions": [{"id": "...", "center": [x, y], "radius": 2.0,
                      "labels": ["s11"]}]},
        ...
      ],
      "detector": {"dt_window": 0.1, "du": ..., "dd": ...},   # optional
      "fprob": {"chi_bar": 5.0, "alpha": 1.0}                 # optional
    }

Each agent's alphabet is the union of its region labels and the atom names
in its formula, sorted; alphabets of distinct agents must be disjoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ltlswarm.control import ControlParams, epsilon_bounds, r_S
from ltlswarm.errors import (
    FormulaSyntaxError,
    LtlSwarmError,
    ScenarioValidationError,
)
from ltlswarm.ltl import Alphabet, is_syntactically_cosafe, parse_formula, to_nnf
from ltlswarm.network import init_graph, is_connected
from ltlswarm.planner import AgentMission, RegionSpec, synthesize_plan
from ltlswarm.protocol import DetectorParams


@dataclass(frozen=True)
class FprobParams:
    chi_bar: float
    alpha: float


@dataclass(frozen=True)
class Scenario:
    name: str
    params: ControlParams
    missions: tuple
    protocol: str                 # "scltl" or "fullltl"
    fprob: FprobParams
    detector: DetectorParams

    def mission(self, agent_id: int) -> AgentMission:
        for m in self.missions:
            if m.agent_id == agent_id:
                return m
        raise KeyError(agent_id)


@dataclass
class ValidationReport:
    violations: list
    warnings: list
    info: dict

    @property
    def ok(self):
        return not self.violations


def _mission_from_dict(entry) -> AgentMission:
    formula_text = entry["formula"]
    parsed, inferred = parse_formula(formula_text)
    label_names = set()
    for reg in entry["regions"]:
        label_names.update(reg["labels"])
    names = sorted(set(inferred.names) | label_names)
    alphabet = Alphabet(names)
    formula = parse_formula(formula_text, alphabet)
    regions = tuple(
        RegionSpec(
            id=str(reg["id"]),
            center=tuple(float(v) for v in reg["center"]),
            radius=float(reg["radius"]),
            labels=frozenset(alphabet.atom_id(name) for name in reg["labels"]),
        )
        for reg in entry["regions"]
    )
    return AgentMission(
        agent_id=int(entry["id"]),
        alphabet=alphabet,
        regions=regions,
        formula=formula,
        start=tuple(float(v) for v in entry["start"]),
    )


def scenario_from_dict(data: dict) -> Scenario:
    params = ControlParams(
        r=float(data["params"]["r"]),
        delta=float(data["params"]["delta"]),
        eps=float(data["params"]["eps"]),
        c_max=float(data["params"]["c_max"]),
        r_min=float(data["params"]["r_min"]),
        n_agents=len(data["agents"]),
    )
    protocol = data.get("protocol", "scltl")
    if protocol not in ("scltl", "fullltl"):
        raise ScenarioValidationError(f"unknown protocol {protocol!r}")
    missions = tuple(_mission_from_dict(entry) for entry in data["agents"])
    ids = [m.agent_id for m in missions]
    if sorted(ids) != list(range(1, len(ids) + 1)):
        raise ScenarioValidationError(
            f"agent ids must be 1..N without gaps, got {ids}")
    fprob_cfg = data.get("fprob", {})
    fprob = FprobParams(
        chi_bar=float(fprob_cfg.get("chi_bar", 5.0)),
        alpha=float(fprob_cfg.get("alpha", 1.0)),
    )
    det_cfg = data.get("detector", {})
    detector = DetectorParams.defaults(
        params,
        dt_window=float(det_cfg.get("dt_window", 0.1)),
        du=float(det_cfg["du"]) if "du" in det_cfg else None,
        dd=float(det_cfg["dd"]) if "dd" in det_cfg else None,
    )
    return Scenario(
        name=str(data.get("name", "scenario")),
        params=params,
        missions=missions,
        protocol=protocol,
        fprob=fprob,
        detector=detector,
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return scenario_from_dict(data)


def validate_scenario(s: Scenario) -> ValidationReport:
    """Structural checks: placement rules, connected start, task class.

    Violations are fatal for a run; warnings document known-benign gaps
    (including a design parameter above its analytic thresholds).
    """
    violations = []
    warnings = []
    info = {}
    p = s.params

    all_regions = [(m.agent_id, reg) for m in s.missions for reg in m.regions]
    for agent_id, reg in all_regions:
        if reg.radius < p.r_min:
            violations.append(
                f"region {reg.id} (agent {agent_id}): radius {reg.radius} < r_min {p.r_min}")
        norm = float(np.linalg.norm(reg.center))
        if norm >= p.c_max:
            violations.append(
                f"region {reg.id} (agent {agent_id}): center norm {norm:.3f} >= c_max {p.c_max}")
    for a in range(len(all_regions)):
        for b in range(a + 1, len(all_regions)):
            ra, rb = all_regions[a][1], all_regions[b][1]
            sep = float(np.linalg.norm(
                np.asarray(ra.center) - np.asarray(rb.center)))
            if sep <= 2 * p.r_min:
                violations.append(
                    f"regions {ra.id} and {rb.id}: centers {sep:.3f} m apart, "
                    f"need > {2 * p.r_min:.3f}")

    names_seen = {}
    for m in s.missions:
        for name in m.alphabet.names:
            if name in names_seen:
                violations.append(
                    f"service name {name!r} appears in agents "
                    f"{names_seen[name]} and {m.agent_id}; alphabets must be disjoint")
            names_seen[name] = m.agent_id

    starts = [m.start for m in s.missions]
    try:
        g0 = init_graph(starts, p.r)
        info["initial_edges"] = g0.edge_list()
    except ScenarioValidationError as exc:
        violations.append(str(exc))

    for m in s.missions:
        cosafe = is_syntactically_cosafe(to_nnf(m.formula))
        if s.protocol == "scltl" and not cosafe:
            warnings.append(
                f"agent {m.agent_id}: non-co-safe task under the co-safe "
                f"protocol; the agent will never turn passive")
        if s.protocol == "fullltl" and cosafe:
            violations.append(
                f"agent {m.agent_id}: co-safe task has a finite plan, which "
                f"the full protocol cannot wrap; use the scltl protocol")

    rs = r_S(p.eps, p)
    info["r_S(eps)"] = rs
    if rs > p.r_min:
        warnings.append(
            f"r_S(eps)={rs:.3f} exceeds r_min={p.r_min}: the analytic "
            f"convergence ball is larger than the smallest region")
    bounds = epsilon_bounds(p)
    info["epsilon_bounds"] = bounds.as_dict()
    exceeded = [k for k, v in bounds.as_dict().items()
                if k.startswith("eps") and k != "eps_min" and p.eps >= v]
    if p.eps >= bounds.e_min:
        warnings.append(
            f"eps={p.eps} is not below the literal eps_min={bounds.e_min:.3e} "
            f"(thresholds exceeded: {', '.join(exceeded)})")
    return ValidationReport(violations=violations, warnings=warnings, info=info)


def synthesize_all(s: Scenario) -> dict:
    """Plans for every agent, keyed by agent id."""
    return {m.agent_id: synthesize_plan(m) for m in s.missions}


def builtin_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package."""
    here = Path(__file__).parent / "scenarios"
    path = here / f"{name}.json"
    if not path.exists():
        known = sorted(q.stem for q in here.glob("*.json"))
        raise LtlSwarmError(f"no builtin scenario {name!r}; known: {known}")
    return path
