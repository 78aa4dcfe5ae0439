"""Symbolic differential polynomials: trees, canonical forms, calculus."""

from .calculus import (
    EvaluationDomainError,
    Evaluator,
    UnboundSymbolError,
    eval_pointwise,
    evaluate,
    spatial_derivative,
    substitute,
    substitution,
    symbols,
    var_name,
)
from .nodes import (
    Add,
    D,
    Deriv,
    Expr,
    Func,
    Mul,
    Num,
    Param,
    Pow,
    Pressure,
    Sym,
    Var,
    coordinate_names,
    from_poly,
    is_canonical,
    lift,
    normalize,
    to_poly,
)
from .poly import FUNCTIONS, StructuralError
from .printer import to_text


def sin(e):
    return Func("sin", e)


def cos(e):
    return Func("cos", e)


def exp(e):
    return Func("exp", e)


def log(e):
    return Func("log", e)


def recip(e):
    return Func("recip", e)


def multi_index_order(alpha):
    """|alpha| for a sparse multi-index."""
    return sum(c for _, c in alpha)


__all__ = [
    "Add", "D", "Deriv", "Expr", "Func", "Mul", "Num", "Param", "Pow", "Pressure",
    "Sym", "Var", "EvaluationDomainError", "Evaluator", "StructuralError",
    "UnboundSymbolError", "FUNCTIONS", "coordinate_names", "cos", "eval_pointwise",
    "evaluate", "exp", "from_poly", "is_canonical", "lift", "log", "multi_index_order",
    "normalize", "recip", "sin", "spatial_derivative", "substitute", "substitution",
    "symbols", "to_poly", "to_text", "var_name",
]
