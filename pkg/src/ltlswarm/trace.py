"""Event traces and their CSV serialization.

``samples.csv`` holds one row per integration step (plus the final state):
time, every pairwise distance, the team potential, a curvature bound used
by the descent monitor, and each agent's input norm.  ``events.csv`` holds
the discrete events in order: time, kind, agent, and a compact JSON
payload.  Formatting uses ``repr`` floats, so equal runs produce byte-equal
files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class EventTrace:
    n_agents: int
    dt: float
    events: list = field(default_factory=list)   # (step, kind, agent, payload)
    samples: list = field(default_factory=list)  # rows of floats
    meta: dict = field(default_factory=dict)

    def pair_columns(self):
        return [(i, j) for i in range(self.n_agents)
                for j in range(i + 1, self.n_agents)]

    def sample_header(self):
        cols = ["t"]
        cols += [f"d_{i + 1}_{j + 1}" for i, j in self.pair_columns()]
        cols += ["V", "hbound"]
        cols += [f"u_{i + 1}" for i in range(self.n_agents)]
        return cols

    def add_sample(self, step, distances, potential, hbound, u_norms):
        self.samples.append(
            [step * self.dt, *distances, potential, hbound, *u_norms])

    def add_event(self, step, kind, agent, payload):
        self.events.append((step, kind, agent, payload))

    def events_of(self, kind, agent=None):
        return [e for e in self.events
                if e[1] == kind and (agent is None or e[2] == agent)]

    def provision_times(self):
        """Per-agent timestamps of goal_reached events (word growth)."""
        out = {i + 1: [] for i in range(self.n_agents)}
        for step, kind, agent, _ in self.events:
            if kind == "goal_reached":
                out[agent].append(step * self.dt)
        return out

    def words(self):
        """Per-agent provided service-name sequences."""
        out = {i + 1: [] for i in range(self.n_agents)}
        for _, kind, agent, payload in self.events:
            if kind == "goal_reached":
                out[agent].append(tuple(payload["services"]))
        return out

    def samples_array(self):
        return np.asarray(self.samples, dtype=float)

    def write_samples_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(self.sample_header()) + "\n")
            for row in self.samples:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    def write_events_csv(self, path):
        # payload is the final column and may itself contain commas; readers
        # must split at most three times
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,kind,agent,payload\n")
            for step, kind, agent, payload in self.events:
                blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
                fh.write(f"{repr(float(step * self.dt))},{kind},{agent},{blob}\n")


def read_samples_csv(path):
    """Header list plus float matrix."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.strip().split(",")]
                for line in fh if line.strip()]
    return header, np.asarray(rows, dtype=float)


def read_events_csv(path):
    """List of (t, kind, agent, payload-dict) tuples."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            t_str, kind, agent_str, blob = line.split(",", 3)
            out.append((float(t_str), kind, int(agent_str), json.loads(blob)))
    return out
