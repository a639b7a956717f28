"""LTL formula AST, alphabet handling, parsing, and printing.

Concrete syntax::

    phi ::= "1" | "0" | ident | "!" phi | "X" phi | "F" phi | "G" phi
          | phi "U" phi | phi "R" phi | phi "&" phi | phi "|" phi | "(" phi ")"

Precedence (tightest first): unary (!, X, F, G), then U/R (right
associative), then &, then |.  Identifiers match ``[A-Za-z_][A-Za-z0-9_]*``;
the single capital letters X/F/G/U/R are reserved operator names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ltlswarm.errors import FormulaSyntaxError, UnknownAtomError

AtomId = int


class Alphabet:
    """Ordered set of atomic proposition names; atoms are indices into it."""

    def __init__(self, names):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate atom names: {names}")
        self.names = names
        self._index = {name: i for i, name in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __contains__(self, name):
        return name in self._index

    def atom_id(self, name: str) -> AtomId:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownAtomError(
                f"unknown atom {name!r}; alphabet is {list(self.names)}"
            ) from None

    def name(self, atom: AtomId) -> str:
        return self.names[atom]

    def __repr__(self):
        return f"Alphabet({list(self.names)})"


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    atom: AtomId


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    child: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula


@dataclass(frozen=True)
class Always(Formula):
    child: Formula


_RESERVED = {"X", "F", "G", "U", "R"}
_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([01&|!()])|(\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        ident, sym, bad = m.groups()
        start = m.start(1) if ident else (m.start(2) if sym else m.start(3))
        if bad is not None:
            raise FormulaSyntaxError(f"unexpected character {bad!r}", start)
        tokens.append((ident or sym, start))
        pos = m.end()
    tokens.append(("<end>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, alphabet):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.alphabet = alphabet
        self.seen_names = []

    def peek(self):
        return self.tokens[self.i][0]

    def pos(self):
        return self.tokens[self.i][1]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, tok):
        got, pos = self.take()
        if got != tok:
            raise FormulaSyntaxError(f"expected {tok!r}, found {got!r}", pos)

    def parse(self):
        f = self.parse_or()
        got, pos = self.take()
        if got != "<end>":
            raise FormulaSyntaxError(f"trailing input {got!r}", pos)
        return f

    def parse_or(self):
        f = self.parse_and()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self):
        f = self.parse_temporal()
        while self.peek() == "&":
            self.take()
            f = And(f, self.parse_temporal())
        return f

    def parse_temporal(self):
        # U and R share one precedence level and associate to the right.
        f = self.parse_unary()
        tok = self.peek()
        if tok == "U":
            self.take()
            return Until(f, self.parse_temporal())
        if tok == "R":
            self.take()
            return Release(f, self.parse_temporal())
        return f

    def parse_unary(self):
        tok, pos = self.take()
        if tok == "!":
            return Not(self.parse_unary())
        if tok == "X":
            return Next(self.parse_unary())
        if tok == "F":
            return Eventually(self.parse_unary())
        if tok == "G":
            return Always(self.parse_unary())
        if tok == "(":
            f = self.parse_or()
            self.expect(")")
            return f
        if tok == "1":
            return TrueF()
        if tok == "0":
            return FalseF()
        if tok == "<end>":
            raise FormulaSyntaxError("unexpected end of input", pos)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in _RESERVED:
            if tok not in self.seen_names:
                self.seen_names.append(tok)
            if self.alphabet is not None:
                return Atom(self.alphabet.atom_id(tok))
            return Atom(-1 - self.seen_names.index(tok))  # patched afterwards
        raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)


def _patch_atoms(f, mapping):
    if isinstance(f, Atom):
        return Atom(mapping[f.atom])
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, (Not, Next, Eventually, Always)):
        return type(f)(_patch_atoms(f.child, mapping))
    return type(f)(_patch_atoms(f.left, mapping), _patch_atoms(f.right, mapping))


def parse_formula(text: str, alphabet: Alphabet | None = None):
    """Parse ``text`` into a Formula.

    With an explicit ``alphabet``, atom names resolve against it (unknown
    names raise).  Without one, a fresh alphabet is built from the atom
    names in order of first appearance and returned alongside the formula.

    Returns ``formula`` when ``alphabet`` is given, else ``(formula,
    alphabet)``.
    """
    parser = _Parser(text, alphabet)
    f = parser.parse()
    if alphabet is not None:
        return f
    fresh = Alphabet(parser.seen_names)
    mapping = {-1 - i: i for i in range(len(parser.seen_names))}
    return _patch_atoms(f, mapping), fresh


def atoms_of(f: Formula) -> frozenset:
    """Set of atom ids appearing in ``f``."""
    if isinstance(f, Atom):
        return frozenset({f.atom})
    if isinstance(f, (TrueF, FalseF)):
        return frozenset()
    if isinstance(f, (Not, Next, Eventually, Always)):
        return atoms_of(f.child)
    return atoms_of(f.left) | atoms_of(f.right)


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms using the standard dualities."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Next):
        return Next(to_nnf(f.child))
    if isinstance(f, Eventually):
        return Eventually(to_nnf(f.child))
    if isinstance(f, Always):
        return Always(to_nnf(f.child))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    # f is a negation: dispatch on the child.
    g = f.child
    if isinstance(g, TrueF):
        return FalseF()
    if isinstance(g, FalseF):
        return TrueF()
    if isinstance(g, Atom):
        return f
    if isinstance(g, Not):
        return to_nnf(g.child)
    if isinstance(g, And):
        return Or(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if isinstance(g, Or):
        return And(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if isinstance(g, Next):
        return Next(to_nnf(Not(g.child)))
    if isinstance(g, Eventually):
        return Always(to_nnf(Not(g.child)))
    if isinstance(g, Always):
        return Eventually(to_nnf(Not(g.child)))
    if isinstance(g, Until):
        return Release(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    if isinstance(g, Release):
        return Until(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
    raise TypeError(f"unknown formula node {g!r}")


def is_nnf(f: Formula) -> bool:
    """True iff every negation in ``f`` sits directly above an atom."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return True
    if isinstance(f, Not):
        return isinstance(f.child, Atom)
    if isinstance(f, (Next, Eventually, Always)):
        return is_nnf(f.child)
    return is_nnf(f.left) and is_nnf(f.right)


def is_syntactically_cosafe(f: Formula) -> bool:
    """No Always/Release anywhere and negation only on atoms."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return True
    if isinstance(f, (Always, Release)):
        return False
    if isinstance(f, Not):
        return isinstance(f.child, Atom)
    if isinstance(f, (Next, Eventually)):
        return is_syntactically_cosafe(f.child)
    return is_syntactically_cosafe(f.left) and is_syntactically_cosafe(f.right)


_UNARY_OPS = {Not: "!", Next: "X", Eventually: "F", Always: "G"}
_BINARY_OPS = {Until: "U", Release: "R", And: "&", Or: "|"}
# precedence: higher binds tighter; atoms/constants act as level 5
_PREC = {Or: 1, And: 2, Until: 3, Release: 3, Not: 4, Next: 4, Eventually: 4, Always: 4}


def format_formula(f: Formula, alphabet: Alphabet | None = None) -> str:
    """Render ``f`` in the concrete syntax; re-parsing yields an equal AST."""

    def name(atom):
        return alphabet.name(atom) if alphabet is not None else f"a{atom}"

    def fmt(g, min_prec):
        if isinstance(g, TrueF):
            return "1"
        if isinstance(g, FalseF):
            return "0"
        if isinstance(g, Atom):
            return name(g.atom)
        prec = _PREC[type(g)]
        if type(g) in _UNARY_OPS:
            s = f"{_UNARY_OPS[type(g)]} {fmt(g.child, prec)}"
        elif type(g) in (Until, Release):
            # right associative: the left child needs parens at equal level
            s = f"{fmt(g.left, prec + 1)} {_BINARY_OPS[type(g)]} {fmt(g.right, prec)}"
        else:
            # & and | parse left associative
            s = f"{fmt(g.left, prec)} {_BINARY_OPS[type(g)]} {fmt(g.right, prec + 1)}"
        return f"({s})" if prec < min_prec else s

    return fmt(f, 0)
