"""Exact symbolic scalars: parsing, normal forms, calculus, evaluation."""

from .calculus import antiderivative, diff, diff_tree, nf_diff, subs
from .expr import (Add, Const, Div, Exp, Expr, Log, Mul, Opaque, Pow, Sqrt,
                   SymbolicError, Var, lift)
from .functions import derivative_rule, is_registered, register_function
from .normal import NF, from_nf, normalize, to_nf
from .numeric import EvalError, Zero, ZeroTest, evaluate, exact_value, is_zero
from .parser import ParseError, VarRegistry, parse
from .scalar import I, ONE, ZERO, Scalar, as_scalar

__all__ = [
    "Add", "Const", "Div", "Exp", "Expr", "Log", "Mul", "Opaque", "Pow", "Sqrt",
    "Var", "lift", "SymbolicError", "Scalar", "as_scalar", "ZERO", "ONE", "I",
    "NF", "to_nf", "from_nf", "normalize", "diff", "diff_tree", "nf_diff", "subs",
    "antiderivative", "evaluate", "exact_value", "is_zero", "Zero", "ZeroTest",
    "EvalError", "parse", "ParseError", "VarRegistry", "register_function",
    "derivative_rule", "is_registered", "sym",
]


def sym(text: str, *names: str) -> Expr:
    """Parse and normalize; convenience for literals in code and tests."""
    registry = VarRegistry(names) if names else None
    return normalize(parse(text, registry))
