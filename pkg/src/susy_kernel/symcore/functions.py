"""Registry of named analytic functions and their derivative rules.

A rule maps ``(arg, order)`` to the derivative of ``name^{(order)}`` with
respect to its argument, evaluated at ``arg``.  Registration never
overwrites an existing rule, so once a name is known its meaning is fixed.
"""

from __future__ import annotations

from typing import Callable

from .expr import Add, Const, Div, Exp, Expr, Mul, Opaque, Pow, Var

__all__ = ["register_function", "derivative_rule", "is_registered", "registered_names"]

Rule = Callable[[Expr, int], Expr]

_RULES: dict[str, Rule] = {}


def _generic(name: str) -> Rule:
    return lambda arg, order: Opaque(name, arg, order + 1)


def _weierstrass(arg: Expr, order: int) -> Expr:
    # wp'' = 6 wp^2 - g2/2; g2 enters as an even parameter.
    if order == 1:
        return Add(Mul(Const(6), Pow(Opaque("wp", arg), 2)), Mul(Const(-1), Var("g2"), Const("1/2")))
    return Opaque("wp", arg, order + 1)


def register_function(name: str, rule: Rule | None = None) -> None:
    if name in ("exp", "log", "sqrt", "i"):
        raise ValueError(f"{name!r} is reserved")
    if name in _RULES:
        return
    _RULES[name] = rule if rule is not None else _generic(name)


def is_registered(name: str) -> bool:
    return name in _RULES


def registered_names() -> frozenset[str]:
    return frozenset(_RULES)


def derivative_rule(name: str) -> Rule:
    try:
        return _RULES[name]
    except KeyError:
        raise KeyError(f"opaque function {name!r} has no registered derivative rule") from None


def _exponential_integral(arg: Expr, order: int) -> Expr:
    # Ei'(x) = exp(x)/x; higher derivatives follow from the quotient rule
    if order == 0:
        return Div(Exp(arg), arg)
    return Opaque("Ei", arg, order + 1)


register_function("wp", _weierstrass)
register_function("Ei", _exponential_integral)
