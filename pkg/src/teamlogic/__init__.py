"""Model checking and formula rewrites for logics with team semantics."""
from .formula import ParseError, parse_formula, to_text
from .model import FormatError, Signature, Structure, Team, load_structure, load_team, pure_structure
from .semantics import LAX, STRICT, BudgetExhausted, EvalBudget, Semantics, evaluate

__all__ = [
    "ParseError",
    "parse_formula",
    "to_text",
    "FormatError",
    "Signature",
    "Structure",
    "Team",
    "load_structure",
    "load_team",
    "pure_structure",
    "LAX",
    "STRICT",
    "BudgetExhausted",
    "EvalBudget",
    "Semantics",
    "evaluate",
]
