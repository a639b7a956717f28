"""Discrete plan synthesis: regions, missions, and prefix-suffix plans.

The workspace is bounded and obstacle-free, so the region transition
structure is the complete directed graph (with self-loops) over an agent's
regions.  Co-safe tasks get a shortest accepting path through the product
with the finite automaton; general tasks get a shortest accepting lasso
through the product with the Buechi automaton.  Service sets are the
minimal letters enabling the chosen automaton transition.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ltlswarm.errors import ScenarioValidationError, SynthesisError
from ltlswarm.ltl import (
    Alphabet,
    Formula,
    LassoWord,
    eval_lasso,
    is_syntactically_cosafe,
    parse_formula,
    to_nnf,
    translate_cosafe_to_nfa,
    translate_to_buchi,
)


@dataclass(frozen=True)
class RegionSpec:
    """Circular region of interest with its service labels."""

    id: str
    center: tuple          # (x, y) meters
    radius: float
    labels: frozenset      # atom ids providable inside this region

    def contains(self, point) -> bool:
        d = np.asarray(point, dtype=float) - np.asarray(self.center, dtype=float)
        return float(d @ d) <= self.radius**2


@dataclass(frozen=True)
class AgentMission:
    agent_id: int
    alphabet: Alphabet
    regions: tuple           # RegionSpec, order fixes tie-breaking
    formula: Formula
    start: tuple             # initial position (x, y)

    def __post_init__(self):
        if not self.regions:
            raise ScenarioValidationError(
                f"agent {self.agent_id} has no regions of interest")
        ids = [r.id for r in self.regions]
        if len(set(ids)) != len(ids):
            raise ScenarioValidationError(
                f"agent {self.agent_id} has duplicate region ids")
        universe = frozenset(range(len(self.alphabet)))
        for r in self.regions:
            if not r.labels <= universe:
                raise ScenarioValidationError(
                    f"region {r.id} labels {set(r.labels)} outside the alphabet")

    def region(self, region_id: str) -> RegionSpec:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise KeyError(region_id)


@dataclass(frozen=True)
class DiscretePlan:
    """Prefix-suffix sequence of (region id, service set) steps.

    ``suffix`` is empty exactly when the task was handled as co-safe; then
    the plan is the finite satisfying prefix.  1-based plan indices run
    1..K with K = len(prefix) + len(suffix); after step K the index wraps to
    len(prefix) + 1.
    """

    prefix: tuple        # ((region_id, frozenset), ...)
    suffix: tuple

    def __post_init__(self):
        if not self.prefix and not self.suffix:
            raise SynthesisError("a plan must have at least one step")

    @property
    def k(self):
        return len(self.prefix)

    @property
    def big_k(self):
        return len(self.prefix) + len(self.suffix)

    def step(self, index: int):
        """1-based lookup across prefix then suffix."""
        if not 1 <= index <= self.big_k:
            raise IndexError(index)
        if index <= self.k:
            return self.prefix[index - 1]
        return self.suffix[index - self.k - 1]

    def next_index(self, index: int) -> int:
        """Advance with suffix wrap-around; co-safe plans stop at K."""
        if index < self.big_k:
            return index + 1
        if self.suffix:
            return self.k + 1
        return index

    def to_dict(self, alphabet: Alphabet | None = None):
        def fmt(stepseq):
            out = []
            for region_id, services in stepseq:
                names = sorted(
                    alphabet.name(s) if alphabet else s for s in services)
                out.append({"region": region_id, "services": names})
            return out

        return {
            "steps": fmt(self.prefix) + fmt(self.suffix),
            "suffix_start": self.k,
        }


@dataclass(frozen=True)
class RegionGraph:
    """Complete directed region transition structure, self-loops included."""

    region_ids: tuple
    labels: dict = field(hash=False)

    @property
    def n_edges(self):
        return len(self.region_ids) ** 2

    def edges(self):
        for a in self.region_ids:
            for b in self.region_ids:
                yield (a, b)


def build_region_graph(mission: AgentMission, params=None) -> RegionGraph:
    """Region transition structure; optionally checks the placement rules.

    With ``params`` given, verifies radius >= r_min, center norms < c_max,
    and pairwise center separation > 2 r_min within this mission.
    """
    if params is not None:
        for reg in mission.regions:
            if reg.radius < params.r_min:
                raise ScenarioValidationError(
                    f"region {reg.id} radius {reg.radius} below r_min {params.r_min}")
            if float(np.linalg.norm(reg.center)) >= params.c_max:
                raise ScenarioValidationError(
                    f"region {reg.id} center norm >= c_max {params.c_max}")
        regs = mission.regions
        for a in range(len(regs)):
            for b in range(a + 1, len(regs)):
                sep = float(np.linalg.norm(
                    np.asarray(regs[a].center) - np.asarray(regs[b].center)))
                if sep <= 2 * params.r_min:
                    raise ScenarioValidationError(
                        f"regions {regs[a].id} and {regs[b].id} centers are "
                        f"{sep:.3f} m apart; need > {2 * params.r_min}")
    return RegionGraph(
        region_ids=tuple(r.id for r in mission.regions),
        labels={r.id: r.labels for r in mission.regions},
    )


def _letter_key(letter):
    return (len(letter), sorted(letter))


def _step_candidates(mission, transitions):
    """Deterministic (region, letter, dst) options for one plan step.

    The letter is the transition's required set (the minimal enabling
    choice); regions are tried in mission order, so ties break toward the
    lowest region index and the lexicographically smallest service set.
    """
    options = []
    for t in sorted(transitions, key=lambda t: (_letter_key(t.req), sorted(t.forb), t.dst)):
        if t.req & t.forb:
            continue
        for region in mission.regions:
            if t.req <= region.labels:
                options.append((region.id, t.req, t.dst))
                break  # lowest region index wins
    return options


def synthesize_plan(mission: AgentMission) -> DiscretePlan:
    """Shortest discrete plan whose word satisfies the mission formula.

    Co-safe tasks use the finite automaton product (empty suffix), general
    tasks the Buechi product (shortest accepting prefix, then the shortest
    cycle through that accepting state).  Raises SynthesisError when no
    accepting path or lasso exists.
    """
    nnf = to_nnf(mission.formula)
    if is_syntactically_cosafe(nnf):
        plan = _synthesize_cosafe(mission, nnf)
    else:
        plan = _synthesize_general(mission, nnf)
    if not validate_plan(plan, mission.formula):
        raise SynthesisError(
            f"internal error: synthesized plan fails validation for agent "
            f"{mission.agent_id}")
    return plan


def _synthesize_cosafe(mission, nnf):
    nfa = translate_cosafe_to_nfa(nnf)
    # breadth-first over automaton states; one level per plan step; the
    # empty plan is never valid, so acceptance is only checked on successors
    parent = {}
    frontier = sorted(nfa.initial)
    seen = set(frontier)
    while frontier:
        nxt = []
        for q in frontier:
            for region_id, letter, dst in _step_candidates(
                    mission, nfa.transitions_from(q)):
                if dst in nfa.accepting:
                    steps = [(region_id, letter)]
                    back = q
                    while back in parent:
                        back, rid, lt = parent[back]
                        steps.append((rid, lt))
                    steps.reverse()
                    return DiscretePlan(prefix=tuple(steps), suffix=())
                if dst not in seen:
                    seen.add(dst)
                    parent[dst] = (q, region_id, letter)
                    nxt.append(dst)
        frontier = nxt
    raise SynthesisError(
        f"agent {mission.agent_id}: task is unrealizable over its regions")


def _synthesize_general(mission, nnf):
    buchi = translate_to_buchi(nnf)

    def bfs(sources):
        parent = {}
        dist = {q: 0 for q in sources}
        frontier = deque(sorted(sources))
        while frontier:
            q = frontier.popleft()
            for region_id, letter, dst in _step_candidates(
                    mission, buchi.transitions_from(q)):
                if dst not in dist:
                    dist[dst] = dist[q] + 1
                    parent[dst] = (q, region_id, letter)
                    frontier.append(dst)
        return dist, parent

    def extract(parent, q, stop_set):
        steps = []
        while q in parent:
            q, region_id, letter = parent[q]
            steps.append((region_id, letter))
            if q in stop_set:
                break
        steps.reverse()
        return steps

    dist0, parent0 = bfs(set(buchi.initial))
    best = None
    for acc in sorted(buchi.accepting):
        if acc not in dist0:
            continue
        # shortest cycle through acc: one forced step, then shortest path back
        cyc_parent = {}
        cyc_dist = {}
        frontier = deque()
        for region_id, letter, dst in _step_candidates(
                mission, buchi.transitions_from(acc)):
            if dst not in cyc_dist:
                cyc_dist[dst] = 1
                cyc_parent[dst] = (None, region_id, letter)
                frontier.append(dst)
        if acc not in cyc_dist:
            while frontier:
                q = frontier.popleft()
                if q == acc:
                    break
                for region_id, letter, dst in _step_candidates(
                        mission, buchi.transitions_from(q)):
                    if dst not in cyc_dist:
                        cyc_dist[dst] = cyc_dist[q] + 1
                        cyc_parent[dst] = (q, region_id, letter)
                        frontier.append(dst)
        if acc not in cyc_dist:
            continue
        score = (dist0[acc], cyc_dist[acc], acc)
        if best is None or score < best[0]:
            best = (score, acc, dict(cyc_parent))
    if best is None:
        raise SynthesisError(
            f"agent {mission.agent_id}: no accepting lasso; task unrealizable")
    _, acc, cyc_parent = best
    prefix = extract(parent0, acc, set())
    cycle = []
    q = acc
    while True:
        prev, region_id, letter = cyc_parent[q]
        cycle.append((region_id, letter))
        if prev is None:
            break
        q = prev
    cycle.reverse()
    return DiscretePlan(prefix=tuple(prefix), suffix=tuple(cycle))


def plan_word(plan: DiscretePlan):
    """Project the plan onto its service sets.

    Co-safe plans yield a finite word (list of letters); general plans a
    LassoWord (prefix letters, cycle letters).
    """
    prefix = tuple(letter for _, letter in plan.prefix)
    if not plan.suffix:
        return list(prefix)
    cycle = tuple(letter for _, letter in plan.suffix)
    return LassoWord(prefix, cycle)


def validate_plan(plan: DiscretePlan, formula: Formula) -> bool:
    """Check the plan's word against the formula with the semantic oracle.

    Finite (co-safe) words are padded with empty letters; the plan must
    also only promise services its regions carry, which DiscretePlan
    construction cannot check without the mission, so synthesis guarantees
    it by picking letters inside region labels.
    """
    word = plan_word(plan)
    if isinstance(word, LassoWord):
        return eval_lasso(formula, word)
    return eval_lasso(formula, LassoWord(tuple(word), (frozenset(),)))
