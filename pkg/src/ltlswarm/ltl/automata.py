"""Automata for LTL: tableau translation, co-safe NFA, membership tests.

The Buechi construction is the classic on-the-fly tableau: graph nodes carry
(old, next) obligation sets, transitions are labeled by the literal part of
the target node (required and forbidden atoms), generalized acceptance has
one set per until-subformula, and a counter product degeneralizes to a
single accepting set.  The co-safe translation tracks leftover obligations
directly; the empty obligation set is the unique accepting state, so a word
is accepted exactly when it discharges the whole formula by itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ltlswarm.errors import CosafetyError, NormalFormError, StateLimitError
from ltlswarm.ltl.formula import (
    Always,
    And,
    Atom,
    Eventually,
    FalseF,
    Formula,
    Next,
    Not,
    Or,
    Release,
    TrueF,
    Until,
    is_nnf,
    is_syntactically_cosafe,
    to_nnf,
)
from ltlswarm.ltl.semantics import LassoWord

DEFAULT_STATE_CAP = 100_000


@dataclass(frozen=True)
class Transition:
    src: int
    req: frozenset
    forb: frozenset
    dst: int

    def admits(self, letter) -> bool:
        return self.req <= letter and not (self.forb & letter)


@dataclass(frozen=True)
class BuchiAutomaton:
    n_states: int
    initial: frozenset
    transitions: tuple
    accepting: frozenset
    _by_src: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        by_src = {}
        for t in self.transitions:
            by_src.setdefault(t.src, []).append(t)
        object.__setattr__(self, "_by_src", by_src)

    def transitions_from(self, state):
        return self._by_src.get(state, [])


@dataclass(frozen=True)
class FiniteAutomaton:
    """Same structure as the Buechi automaton; acceptance over finite words."""

    n_states: int
    initial: frozenset
    transitions: tuple
    accepting: frozenset
    _by_src: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        by_src = {}
        for t in self.transitions:
            by_src.setdefault(t.src, []).append(t)
        object.__setattr__(self, "_by_src", by_src)

    def transitions_from(self, state):
        return self._by_src.get(state, [])


def _rewrite_fg(f):
    """Rewrite F/G into U/R so the tableau only sees U, R, X, and booleans."""
    if isinstance(f, (TrueF, FalseF, Atom, Not)):
        return f
    if isinstance(f, Eventually):
        return Until(TrueF(), _rewrite_fg(f.child))
    if isinstance(f, Always):
        return Release(FalseF(), _rewrite_fg(f.child))
    if isinstance(f, Next):
        return Next(_rewrite_fg(f.child))
    return type(f)(_rewrite_fg(f.left), _rewrite_fg(f.right))


def _closure_order(f):
    """Stable numbering of subformulas, used for deterministic set pops."""
    order = {}

    def walk(g):
        if g in order:
            return
        order[g] = len(order)
        if isinstance(g, (Not, Next)):
            walk(g.child)
        elif isinstance(g, (And, Or, Until, Release)):
            walk(g.left)
            walk(g.right)

    walk(TrueF())
    walk(FalseF())
    walk(f)
    return order


def _is_literal(g):
    return isinstance(g, (TrueF, FalseF, Atom)) or (
        isinstance(g, Not) and isinstance(g.child, Atom)
    )


def _neg_literal(g):
    if isinstance(g, TrueF):
        return FalseF()
    if isinstance(g, FalseF):
        return TrueF()
    if isinstance(g, Atom):
        return Not(g)
    return g.child


class _Node:
    __slots__ = ("name", "incoming", "new", "old", "next")

    def __init__(self, name, incoming, new, old, next_):
        self.name = name
        self.incoming = set(incoming)
        self.new = set(new)
        self.old = set(old)
        self.next = set(next_)


_INIT = -1


def _tableau_graph(f, state_cap):
    """Run the node expansion; returns the list of closed nodes."""
    order = _closure_order(f)

    def key(g):
        return order.get(g, len(order))

    closed = []
    fresh = iter(range(10**9))

    def new_node(incoming, new, old, next_):
        name = next(fresh)
        if name >= state_cap:
            raise StateLimitError(
                f"tableau exceeded the {state_cap}-node cap; formula too large"
            )
        return _Node(name, incoming, new, old, next_)

    stack = [new_node({_INIT}, {f}, set(), set())]
    while stack:
        node = stack.pop()
        if not node.new:
            merged = False
            for nd in closed:
                if nd.old == node.old and nd.next == node.next:
                    nd.incoming |= node.incoming
                    merged = True
                    break
            if merged:
                continue
            closed.append(node)
            stack.append(new_node({node.name}, set(node.next), set(), set()))
            continue
        eta = min(node.new, key=key)
        node.new.discard(eta)
        if _is_literal(eta):
            if isinstance(eta, FalseF) or _neg_literal(eta) in node.old:
                continue  # contradictory node: discard
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, And):
            node.new |= {eta.left, eta.right} - node.old
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, Next):
            node.old.add(eta)
            node.next.add(eta.child)
            stack.append(node)
        elif isinstance(eta, Or):
            n2 = new_node(node.incoming, node.new | ({eta.right} - node.old),
                          node.old | {eta}, node.next)
            n1 = new_node(node.incoming, node.new | ({eta.left} - node.old),
                          node.old | {eta}, node.next)
            stack.append(n2)
            stack.append(n1)
        elif isinstance(eta, Until):
            n2 = new_node(node.incoming, node.new | ({eta.right} - node.old),
                          node.old | {eta}, node.next)
            n1 = new_node(node.incoming, node.new | ({eta.left} - node.old),
                          node.old | {eta}, node.next | {eta})
            stack.append(n2)
            stack.append(n1)
        elif isinstance(eta, Release):
            n2 = new_node(node.incoming,
                          node.new | ({eta.left, eta.right} - node.old),
                          node.old | {eta}, node.next)
            n1 = new_node(node.incoming, node.new | ({eta.right} - node.old),
                          node.old | {eta}, node.next | {eta})
            stack.append(n2)
            stack.append(n1)
        else:
            raise NormalFormError(f"unexpected node {eta!r} in tableau input")
    return closed


def _node_label(node):
    req = frozenset(g.atom for g in node.old if isinstance(g, Atom))
    forb = frozenset(g.child.atom for g in node.old
                     if isinstance(g, Not) and isinstance(g.child, Atom))
    return req, forb


def translate_to_buchi(f: Formula, state_cap: int = DEFAULT_STATE_CAP) -> BuchiAutomaton:
    """Translate an NNF formula into a Buechi automaton.

    State 0 is a virtual initial state; a run consumes one letter per
    transition.  Acceptance is state-based after degeneralization.
    """
    if not is_nnf(f):
        raise NormalFormError("translate_to_buchi requires negation normal form")
    g = _rewrite_fg(f)
    closed = _tableau_graph(g, state_cap)

    untils = sorted(
        {sub for sub in _closure_order(g) if isinstance(sub, Until)},
        key=lambda u: _closure_order(g)[u],
    )
    # generalized acceptance: one set per until-subformula
    acc_sets = []
    for u in untils:
        acc_sets.append(frozenset(
            i for i, nd in enumerate(closed)
            if u not in nd.old or u.right in nd.old
        ))
    m = len(acc_sets)

    index_of = {nd.name: i for i, nd in enumerate(closed)}
    gba_edges = {}  # (src_gba|-1) -> list[(label, dst_gba)]
    for i, nd in enumerate(closed):
        label = _node_label(nd)
        for pred in sorted(nd.incoming):
            src = -1 if pred == _INIT else index_of.get(pred)
            if src is None:
                continue  # predecessor node was merged away before closing
            gba_edges.setdefault(src, []).append((label, i))

    def advance(i, q):
        while i < m and q in acc_sets[i]:
            i += 1
        return i

    # counter product, built over the reachable part only
    state_ids = {}
    transitions = []

    def state_id(s):
        if s not in state_ids:
            state_ids[s] = len(state_ids)
        return state_ids[s]

    start = ("init", 0)
    sid0 = state_id(start)
    work = [start]
    seen = {start}
    while work:
        s = work.pop(0)
        src_gba = -1 if s[0] == "init" else s[0]
        counter = s[1]
        for (req, forb), dst in gba_edges.get(src_gba, []):
            base = 0 if counter == m else counter
            dst_state = (dst, advance(base, dst)) if m else (dst, 0)
            transitions.append(
                Transition(state_id(s), req, forb, state_id(dst_state))
            )
            if dst_state not in seen:
                seen.add(dst_state)
                work.append(dst_state)

    if m:
        accepting = frozenset(
            sid for s, sid in state_ids.items() if s != start and s[1] == m
        )
    else:
        accepting = frozenset(state_ids.values())
    return _prune_buchi(len(state_ids), sid0, transitions, accepting)


def _prune_buchi(n_states, initial, transitions, accepting):
    """Drop states that cannot contribute to any accepting run.

    Every transition predicate is individually satisfiable, so plain graph
    reachability matches language-level reachability here.
    """
    fwd = {}
    bwd = {}
    for t in transitions:
        fwd.setdefault(t.src, set()).add(t.dst)
        bwd.setdefault(t.dst, set()).add(t.src)

    def reach(starts, adj):
        seen = set(starts)
        work = list(starts)
        while work:
            for nb in adj.get(work.pop(), ()):
                if nb not in seen:
                    seen.add(nb)
                    work.append(nb)
        return seen

    # accepting states that lie on a cycle
    on_cycle = {q for q in accepting
                if q in reach(fwd.get(q, set()), fwd)}
    useful = reach(on_cycle, bwd)
    keep = (reach({initial}, fwd) | {initial}) & (useful | {initial})
    remap = {old: new for new, old in enumerate(sorted(keep))}
    kept_edges = []
    seen_edges = set()
    for t in transitions:
        if t.src in keep and t.dst in keep:
            key = (t.src, t.req, t.forb, t.dst)
            if key not in seen_edges:
                seen_edges.add(key)
                kept_edges.append(
                    Transition(remap[t.src], t.req, t.forb, remap[t.dst])
                )
    return _bisim_quotient(
        len(keep),
        frozenset({remap[initial]}),
        kept_edges,
        frozenset(remap[q] for q in accepting if q in keep),
    )


def _bisim_quotient(n_states, initial, transitions, accepting):
    """Merge strongly bisimilar states; language-preserving for Buechi."""
    by_src = {}
    for t in transitions:
        by_src.setdefault(t.src, []).append(t)
    block = [1 if q in accepting else 0 for q in range(n_states)]
    while True:
        sigs = {}
        new_block = []
        for q in range(n_states):
            sig = (block[q], frozenset(
                (t.req, t.forb, block[t.dst]) for t in by_src.get(q, ())
            ))
            if sig not in sigs:
                sigs[sig] = len(sigs)
            new_block.append(sigs[sig])
        if new_block == block:
            break
        block = new_block
    kept = []
    seen = set()
    for t in transitions:
        key = (block[t.src], t.req, t.forb, block[t.dst])
        if key not in seen:
            seen.add(key)
            kept.append(Transition(*key))
    return BuchiAutomaton(
        n_states=max(block) + 1 if block else 0,
        initial=frozenset(block[q] for q in initial),
        transitions=tuple(kept),
        accepting=frozenset(block[q] for q in accepting),
    )


def _cosafe_moves1(g):
    """One-step alternatives for a single obligation.

    Each alternative is (req, forb, next-obligations): the current letter
    must contain req, avoid forb, and the rest of the word must satisfy the
    next obligations.
    """
    if isinstance(g, TrueF):
        return [(frozenset(), frozenset(), frozenset())]
    if isinstance(g, FalseF):
        return []
    if isinstance(g, Atom):
        return [(frozenset({g.atom}), frozenset(), frozenset())]
    if isinstance(g, Not):
        if not isinstance(g.child, Atom):
            raise CosafetyError("negation above a non-atom in co-safe input")
        return [(frozenset(), frozenset({g.child.atom}), frozenset())]
    if isinstance(g, Next):
        return [(frozenset(), frozenset(), frozenset({g.child}))]
    if isinstance(g, And):
        out = []
        for a in _cosafe_moves1(g.left):
            for b in _cosafe_moves1(g.right):
                merged = _merge_move(a, b)
                if merged is not None:
                    out.append(merged)
        return _dedup(out)
    if isinstance(g, Or):
        return _dedup(_cosafe_moves1(g.left) + _cosafe_moves1(g.right))
    if isinstance(g, Until):
        now = _cosafe_moves1(g.right)
        defer = [
            _merge_move(a, (frozenset(), frozenset(), frozenset({g})))
            for a in _cosafe_moves1(g.left)
        ]
        return _dedup(now + [d for d in defer if d is not None])
    if isinstance(g, Eventually):
        now = _cosafe_moves1(g.child)
        return _dedup(now + [(frozenset(), frozenset(), frozenset({g}))])
    raise CosafetyError(f"operator {type(g).__name__} is not co-safe")


def _merge_move(a, b):
    req = a[0] | b[0]
    forb = a[1] | b[1]
    if req & forb:
        return None
    return (req, forb, a[2] | b[2])


def _dedup(moves):
    seen = set()
    out = []
    for mv in moves:
        if mv not in seen:
            seen.add(mv)
            out.append(mv)
    return out


def _cosafe_moves(obligations):
    """Alternatives for a whole obligation set (conjunction)."""
    alts = [(frozenset(), frozenset(), frozenset())]
    for g in sorted(obligations, key=repr):
        nxt = []
        for a in alts:
            for b in _cosafe_moves1(g):
                merged = _merge_move(a, b)
                if merged is not None:
                    nxt.append(merged)
        alts = _dedup(nxt)
    return alts


def translate_cosafe_to_nfa(f: Formula, state_cap: int = DEFAULT_STATE_CAP) -> FiniteAutomaton:
    """NFA over finite words accepting exactly the good prefixes of ``f``.

    States are leftover-obligation sets; the empty set accepts and loops on
    every letter, so accepted words stay accepted under extension.
    """
    f = to_nnf(f)
    if not is_syntactically_cosafe(f):
        raise CosafetyError("formula is not syntactically co-safe")
    start = frozenset() if isinstance(f, TrueF) else frozenset({f})
    ids = {start: 0}
    transitions = []
    work = [start]
    while work:
        state = work.pop(0)
        src = ids[state]
        moves = sorted(_cosafe_moves(state),
                       key=lambda mv: (sorted(mv[0]), sorted(mv[1]), repr(mv[2])))
        for req, forb, nxt in moves:
            if nxt not in ids:
                if len(ids) >= state_cap:
                    raise StateLimitError(
                        f"co-safe NFA exceeded the {state_cap}-state cap"
                    )
                ids[nxt] = len(ids)
                work.append(nxt)
            transitions.append(Transition(src, req, forb, ids[nxt]))
    accepting = frozenset({ids[frozenset()]}) if frozenset() in ids else frozenset()
    return FiniteAutomaton(
        n_states=len(ids),
        initial=frozenset({0}),
        transitions=tuple(transitions),
        accepting=accepting,
    )


def nfa_accepts(A: FiniteAutomaton, word) -> bool:
    """Subset-simulation membership for a finite word (sequence of letters)."""
    frontier = set(A.initial)
    for letter in word:
        letter = frozenset(letter)
        nxt = set()
        for s in frontier:
            for t in A.transitions_from(s):
                if t.admits(letter):
                    nxt.add(t.dst)
        frontier = nxt
        if not frontier:
            return False
    return bool(frontier & A.accepting)


def buchi_accepts(A: BuchiAutomaton, w: LassoWord) -> bool:
    """Membership of prefix.cycle^omega: reachable accepting product cycle.

    The product unrolls the automaton against the canonical word positions;
    the word is accepted iff some accepting product node is reachable from
    the initial frontier and lies on a cycle.
    """
    n = w.positions()

    def succ_pos(p):
        return p + 1 if p + 1 < n else len(w.prefix)

    def neighbors(node):
        q, p = node
        letter = w.letter(p)
        return [(t.dst, succ_pos(p)) for t in A.transitions_from(q) if t.admits(letter)]

    start = [(q, 0) for q in sorted(A.initial)]
    reachable = set(start)
    work = list(start)
    while work:
        node = work.pop()
        for nb in neighbors(node):
            if nb not in reachable:
                reachable.add(nb)
                work.append(nb)

    for node in sorted(reachable):
        if node[0] not in A.accepting:
            continue
        # is node on a cycle? search for a path node -> node of length >= 1
        seen = set()
        work = [nb for nb in neighbors(node)]
        while work:
            cur = work.pop()
            if cur == node:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            work.extend(neighbors(cur))
    return False


def _transition_tables(A, atoms):
    """Per-state, per-letter successor bitmasks for the batch routines."""
    atoms = tuple(atoms)
    if A.n_states > 63:
        raise ValueError("batch membership supports at most 63 states")
    bit = {a: i for i, a in enumerate(atoms)}
    n_letters = 1 << len(atoms)
    table = np.zeros((A.n_states, n_letters), dtype=np.uint64)
    for t in A.transitions:
        extra = [a for a in (t.req | t.forb) if a not in bit]
        if extra:
            raise ValueError(f"automaton mentions atoms {extra} outside the atom tuple")
        req_mask = sum(1 << bit[a] for a in t.req)
        forb_mask = sum(1 << bit[a] for a in t.forb)
        for letter in range(n_letters):
            if letter & req_mask == req_mask and letter & forb_mask == 0:
                table[t.src, letter] |= np.uint64(1 << t.dst)
    return table


def buchi_accepts_block(A: BuchiAutomaton, atoms, prefix_len: int, cycle_len: int) -> np.ndarray:
    """Vectorized ``buchi_accepts`` over every lasso word of one shape.

    Word order matches ``letters_matrix(n_atoms, prefix_len + cycle_len)``.
    The accepting-cycle analysis only depends on the cycle letters, so it is
    computed per distinct cycle word and gathered into the full word space,
    which keeps the exhaustive bounded-equivalence tests fast.
    """
    from ltlswarm.ltl.semantics import letters_matrix

    atoms = tuple(atoms)
    table = _transition_tables(A, atoms)
    n_states = A.n_states
    one = np.uint64(1)
    acc_mask = np.uint64(sum(1 << q for q in A.accepting))
    nonacc_mask = np.uint64(((1 << n_states) - 1) & ~int(acc_mask))

    pre_letters = letters_matrix(len(atoms), prefix_len)
    cyc_letters = letters_matrix(len(atoms), cycle_len)
    n_pre = pre_letters.shape[0]
    n_cyc = cyc_letters.shape[0]

    def apply_letter(frontier, col):
        out = np.zeros(frontier.shape[0], dtype=np.uint64)
        for s in range(n_states):
            hit = ((frontier >> np.uint64(s)) & one).astype(bool)
            out |= np.where(hit, table[s, col], np.uint64(0))
        return out

    # automaton frontier after consuming each possible prefix word
    frontier = np.full(n_pre, sum(1 << q for q in A.initial), dtype=np.uint64)
    for p in range(prefix_len):
        frontier = apply_letter(frontier, pre_letters[:, p])

    # one-cycle reach maps per source state, split by accepting-visit flag
    t_plain = np.zeros((n_states, n_cyc), dtype=np.uint64)
    t_acc = np.zeros((n_states, n_cyc), dtype=np.uint64)
    for q in range(n_states):
        plane0 = np.full(n_cyc, 1 << q, dtype=np.uint64)
        plane1 = np.zeros(n_cyc, dtype=np.uint64)
        for p in range(cycle_len):
            col = cyc_letters[:, p]
            new1 = apply_letter(plane1, col)
            step0 = apply_letter(plane0, col)
            plane1 = new1 | (step0 & acc_mask)
            plane0 = step0 & nonacc_mask
        t_plain[q] = plane0
        t_acc[q] = plane1

    def combine(a0, a1, b0, b1):
        """Concatenate flagged multi-cycle maps: a-segment then b-segment."""
        r0 = np.zeros_like(a0)
        r1 = np.zeros_like(a1)
        for q in range(n_states):
            for s in range(n_states):
                bit_s = np.uint64(s)
                in0 = ((a0[q] >> bit_s) & one).astype(bool)
                in1 = ((a1[q] >> bit_s) & one).astype(bool)
                r0[q] |= np.where(in0, b0[s], np.uint64(0))
                r1[q] |= np.where(in0, b1[s], np.uint64(0))
                r1[q] |= np.where(in1, b0[s] | b1[s], np.uint64(0))
        return r0, r1

    # positive closure over one-or-more whole cycles, by repeated squaring
    c0, c1 = t_plain.copy(), t_acc.copy()
    reps = 1
    while reps < 2 * n_states + 2:
        d0, d1 = combine(c0, c1, c0, c1)
        n0, n1 = c0 | d0, c1 | d1
        if np.array_equal(n0, c0) and np.array_equal(n1, c1):
            break
        c0, c1 = n0, n1
        reps *= 2

    # expand to the full word space: word index = prefix_idx * n_cyc + cyc_idx
    n_words = n_pre * n_cyc
    pre_idx = np.arange(n_words) // n_cyc
    cyc_idx = np.arange(n_words) % n_cyc
    frontier_full = frontier[pre_idx]
    call = c0 | c1
    reach = frontier_full.copy()
    for s in range(n_states):
        hit = ((frontier_full >> np.uint64(s)) & one).astype(bool)
        reach |= np.where(hit, call[s][cyc_idx], np.uint64(0))

    # accepted iff some reachable q lies on a cycle with an accepting visit
    accepted = np.zeros(n_words, dtype=bool)
    for q in range(n_states):
        self_acc = ((c1[q] >> np.uint64(q)) & one).astype(bool)
        in_reach = ((reach >> np.uint64(q)) & one).astype(bool)
        accepted |= in_reach & self_acc[cyc_idx]
    return accepted
