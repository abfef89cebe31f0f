"""Exact inference for the two-child (boy or girl) puzzles with named children."""

from .ratfunc import ONE, R, ZERO, Polynomial, RationalFunction, parse_ratfunc
from .samplespace import (
    I0,
    I1,
    I2,
    Child,
    FamilyOutcome,
    Gender,
    JointDistribution,
    NameClass,
    PitfallTable,
    Regime,
    RegimeKind,
    Slot,
    build_distribution,
    build_pitfall_table,
)
from .events import Atom, atom
from .inference import (
    chain_factorize,
    check_symmetry,
    conditional,
    conditional_name,
    odds_update,
    probability,
    recondition,
)
from .querylang import evaluate, parse

__version__ = "0.1.0"

__all__ = [
    "ONE", "R", "ZERO", "Polynomial", "RationalFunction", "parse_ratfunc",
    "I0", "I1", "I2", "Child", "FamilyOutcome", "Gender", "JointDistribution", "NameClass",
    "PitfallTable", "Regime", "RegimeKind", "Slot", "build_distribution", "build_pitfall_table",
    "Atom", "atom",
    "chain_factorize", "check_symmetry", "conditional", "conditional_name", "odds_update",
    "probability", "recondition",
    "evaluate", "parse",
]
