"""Semantic evaluation of LTL over ultimately-periodic (lasso) words.

This module is the independent oracle the automata constructions are
validated against, so it stays deliberately simple: a memoized recursion
over (subformula, canonical position).  ``eval_lasso_block`` is the same
semantics vectorized with numpy over every word of a fixed shape, used by
the exhaustive bounded-equivalence tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

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
)

Letter = frozenset


@dataclass(frozen=True)
class LassoWord:
    """The infinite word prefix . cycle^omega."""

    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        if len(self.cycle) == 0:
            raise ValueError("lasso cycle must be non-empty")

    @staticmethod
    def of(prefix, cycle):
        return LassoWord(tuple(frozenset(a) for a in prefix),
                         tuple(frozenset(a) for a in cycle))

    def letter(self, pos: int) -> Letter:
        k = len(self.prefix)
        if pos < k:
            return self.prefix[pos]
        return self.cycle[(pos - k) % len(self.cycle)]

    def positions(self) -> int:
        """Number of canonical positions (prefix plus one cycle copy)."""
        return len(self.prefix) + len(self.cycle)

    def succ(self, pos: int) -> int:
        """Canonical successor position; the last one wraps to cycle start."""
        n = self.positions()
        return pos + 1 if pos + 1 < n else len(self.prefix)


def eval_lasso(f: Formula, w: LassoWord) -> bool:
    """Truth of ``f`` on the infinite word ``w`` (position 0)."""
    n = w.positions()
    memo = {}

    def ev(g, p):
        key = (g, p)
        if key in memo:
            return memo[key]
        if isinstance(g, TrueF):
            v = True
        elif isinstance(g, FalseF):
            v = False
        elif isinstance(g, Atom):
            v = g.atom in w.letter(p)
        elif isinstance(g, Not):
            v = not ev(g.child, p)
        elif isinstance(g, And):
            v = ev(g.left, p) and ev(g.right, p)
        elif isinstance(g, Or):
            v = ev(g.left, p) or ev(g.right, p)
        elif isinstance(g, Next):
            v = ev(g.child, w.succ(p))
        elif isinstance(g, (Until, Eventually)):
            # scan the at most n distinct positions reachable from p
            v = False
            q = p
            for _ in range(n + 1):
                if ev(g.right if isinstance(g, Until) else g.child, q):
                    v = True
                    break
                if isinstance(g, Until) and not ev(g.left, q):
                    break
                q = w.succ(q)
        elif isinstance(g, (Release, Always)):
            v = True
            q = p
            for _ in range(n + 1):
                if not ev(g.right if isinstance(g, Release) else g.child, q):
                    v = False
                    break
                if isinstance(g, Release) and ev(g.left, q):
                    break
                q = w.succ(q)
        else:
            raise TypeError(f"unknown formula node {g!r}")
        memo[key] = v
        return v

    return ev(f, 0)


def enumerate_letters(atoms) -> list:
    """All subsets of ``atoms`` in a fixed (bitmask) order."""
    atoms = tuple(atoms)
    out = []
    for mask in range(1 << len(atoms)):
        out.append(frozenset(a for i, a in enumerate(atoms) if mask >> i & 1))
    return out


def letters_matrix(n_atoms: int, length: int) -> np.ndarray:
    """(W, length) uint8 matrix of every word of ``length`` letters.

    Letters are bitmasks over ``n_atoms`` atom slots; row order is
    lexicographic with position 0 as the most significant digit.
    """
    if length == 0:
        return np.zeros((1, 0), dtype=np.uint8)
    n_letters = 1 << n_atoms
    count = n_letters**length
    idx = np.arange(count, dtype=np.int64)
    cols = []
    for p in range(length):
        shift = n_letters ** (length - 1 - p)
        cols.append((idx // shift) % n_letters)
    return np.stack(cols, axis=1).astype(np.uint8)


def eval_lasso_block(f: Formula, atoms, prefix_len: int, cycle_len: int,
                     letters: np.ndarray | None = None) -> np.ndarray:
    """Truth of ``f`` on every lasso word of the given shape.

    ``atoms`` fixes the bit layout: bit ``i`` of a letter encodes membership
    of ``atoms[i]``.  Returns a boolean vector in ``letters_matrix`` order.
    """
    atoms = tuple(atoms)
    n = prefix_len + cycle_len
    if cycle_len < 1:
        raise ValueError("cycle must be non-empty")
    if letters is None:
        letters = letters_matrix(len(atoms), n)
    bit = {a: i for i, a in enumerate(atoms)}
    succ = np.array([p + 1 if p + 1 < n else prefix_len for p in range(n)])
    cache = {}

    def ev(g):
        if g in cache:
            return cache[g]
        if isinstance(g, TrueF):
            v = np.ones(letters.shape, dtype=bool)
        elif isinstance(g, FalseF):
            v = np.zeros(letters.shape, dtype=bool)
        elif isinstance(g, Atom):
            if g.atom not in bit:
                raise ValueError(f"atom {g.atom} not in the supplied atom tuple")
            v = (letters >> bit[g.atom] & 1).astype(bool)
        elif isinstance(g, Not):
            v = ~ev(g.child)
        elif isinstance(g, And):
            v = ev(g.left) & ev(g.right)
        elif isinstance(g, Or):
            v = ev(g.left) | ev(g.right)
        elif isinstance(g, Next):
            v = ev(g.child)[:, succ]
        elif isinstance(g, (Until, Eventually)):
            # least fixpoint of X = target | (guard & X o succ)
            target = ev(g.right if isinstance(g, Until) else g.child)
            guard = ev(g.left) if isinstance(g, Until) else None
            v = target.copy()
            for _ in range(n + 1):
                step = v[:, succ]
                v = target | (step if guard is None else (guard & step))
        elif isinstance(g, (Release, Always)):
            # greatest fixpoint of X = target & (guard | X o succ)
            target = ev(g.right if isinstance(g, Release) else g.child)
            guard = ev(g.left) if isinstance(g, Release) else None
            v = target.copy()
            for _ in range(n + 1):
                step = v[:, succ]
                v = target & (step if guard is None else (guard | step))
        else:
            raise TypeError(f"unknown formula node {g!r}")
        cache[g] = v
        return v

    return ev(f)[:, 0]
