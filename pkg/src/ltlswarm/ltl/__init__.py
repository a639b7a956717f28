"""LTL core: formulas, semantics oracle, and automata translation."""

from ltlswarm.ltl.automata import (
    BuchiAutomaton,
    FiniteAutomaton,
    Transition,
    buchi_accepts,
    buchi_accepts_block,
    nfa_accepts,
    translate_cosafe_to_nfa,
    translate_to_buchi,
)
from ltlswarm.ltl.formula import (
    Alphabet,
    Always,
    And,
    Atom,
    AtomId,
    Eventually,
    FalseF,
    Formula,
    Next,
    Not,
    Or,
    Release,
    TrueF,
    Until,
    atoms_of,
    format_formula,
    is_nnf,
    is_syntactically_cosafe,
    parse_formula,
    to_nnf,
)
from ltlswarm.ltl.semantics import (
    LassoWord,
    Letter,
    enumerate_letters,
    eval_lasso,
    eval_lasso_block,
    letters_matrix,
)

__all__ = [
    "Alphabet", "Always", "And", "Atom", "AtomId", "BuchiAutomaton",
    "Eventually", "FalseF", "FiniteAutomaton", "Formula", "LassoWord",
    "Letter", "Next", "Not", "Or", "Release", "Transition", "TrueF", "Until",
    "atoms_of", "buchi_accepts", "buchi_accepts_block", "enumerate_letters",
    "eval_lasso", "eval_lasso_block", "format_formula", "is_nnf",
    "is_syntactically_cosafe", "letters_matrix", "nfa_accepts",
    "parse_formula", "to_nnf", "translate_cosafe_to_nfa", "translate_to_buchi",
]
