"""Deductive algorithmic knowledge: terms, rule-based deduction, a logic of
explicit knowledge, model checking and satisfiability."""

__version__ = "0.1.0"

from .errors import DeduktError, ModelError, ParseError, SignatureError, TranslationError
from .terms import App, Signature, Var, parse_term, parse_terms, print_term
from .deduction import (
    LOCAL,
    Bounded,
    Deduction,
    DeductiveSystem,
    Derivable,
    NotDerivable,
    Rule,
    Strategy,
    Unknown,
    check_deduction,
    derivable,
    derive,
)
from .formulas import nnf, parse_formula, print_formula, from_term, to_term
from .models import State, Structure, check, satisfying_states, valid_in
from .axioms import AxiomSchema, all_axioms, base_axioms, instantiate, rule_axioms
from .sat import Sat, Unsat, UnknownAtBound, is_valid, sat_fixed_d, sat_general, sat_multi, translate_tilde
from .presets import PRESETS, load_preset, relabel, simulative_extension
from .files import dump_model, load_model, load_rules, load_system, parse_model, parse_rules, print_system
