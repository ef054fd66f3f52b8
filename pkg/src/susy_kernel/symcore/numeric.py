"""Floating-point evaluation and the tri-state zero test."""

from __future__ import annotations

import cmath
import enum
import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .expr import Add, Const, Div, Exp, Expr, Log, Mul, Opaque, Pow, Sqrt, Var, lift
from .normal import NF, to_nf
from .scalar import Scalar

__all__ = ["EvalError", "evaluate", "Zero", "ZeroTest", "is_zero", "exact_value"]

POLE_EPS = 1e-300


class EvalError(ValueError):
    """Unbound variable, missing hook, or evaluation at a pole."""


# functions with a known numeric value; caller hooks take precedence
BUILTIN_HOOKS = {"Ei": lambda x: complex(mpmath.ei(x))}


def _with_builtins(hooks):
    return {**BUILTIN_HOOKS, **(hooks or {})}


def evaluate(e, env: dict, hooks: dict | None = None) -> complex:
    """Evaluate ``e`` with variables bound by ``env``.

    ``hooks`` maps an opaque name, with one prime per derivative order
    (``"wp"``, ``"wp'"``), to a callable on complex numbers.
    """
    return _ev(lift(e), env, _with_builtins(hooks))


def _ev(e: Expr, env, hooks) -> complex:
    if isinstance(e, Const):
        return complex(e.value)
    if isinstance(e, Var):
        try:
            return complex(env[e.name])
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Add):
        return sum((_ev(a, env, hooks) for a in e.args), 0j)
    if isinstance(e, Mul):
        out = 1 + 0j
        for a in e.args:
            out *= _ev(a, env, hooks)
        return out
    if isinstance(e, Pow):
        b = _ev(e.base, env, hooks)
        if e.exp < 0 and abs(b) < POLE_EPS:
            raise EvalError("pole: negative power of a vanishing value")
        return b ** e.exp
    if isinstance(e, Div):
        d = _ev(e.den, env, hooks)
        if abs(d) < POLE_EPS:
            raise EvalError("pole: division by a vanishing value")
        return _ev(e.num, env, hooks) / d
    if isinstance(e, Exp):
        return cmath.exp(_ev(e.arg, env, hooks))
    if isinstance(e, Log):
        a = _ev(e.arg, env, hooks)
        if abs(a) < POLE_EPS:
            raise EvalError("pole: log of a vanishing value")
        return cmath.log(a)
    if isinstance(e, Sqrt):
        return cmath.sqrt(_ev(e.arg, env, hooks))
    if isinstance(e, Opaque):
        fn = hooks.get(e.hook_name)
        if fn is None:
            raise EvalError(f"no numeric hook for {e.hook_name!r}")
        return complex(fn(_ev(e.arg, env, hooks)))
    raise TypeError(f"unknown expression node {type(e).__name__}")


def exact_value(e, env: dict) -> Scalar:
    """Exact value of a rational expression at a point of Q(i)."""
    e = lift(e)
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return Scalar(env[e.name]) if not isinstance(env[e.name], Scalar) else env[e.name]
        except KeyError:
            raise EvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Add):
        out = Scalar(0)
        for a in e.args:
            out = out + exact_value(a, env)
        return out
    if isinstance(e, Mul):
        out = Scalar(1)
        for a in e.args:
            out = out * exact_value(a, env)
        return out
    if isinstance(e, Pow):
        b = exact_value(e.base, env)
        if e.exp < 0 and not b:
            raise EvalError("pole: negative power of zero")
        return b ** e.exp
    if isinstance(e, Div):
        d = exact_value(e.den, env)
        if not d:
            raise EvalError("pole: division by zero")
        return exact_value(e.num, env) / d
    raise EvalError(f"{type(e).__name__} has no exact value")


class Zero(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass
class ZeroTest:
    verdict: Zero
    witness: dict | None = None
    value: complex | None = None
    detail: str = ""

    def __bool__(self):
        return self.verdict is Zero.YES

    @property
    def yes(self):
        return self.verdict is Zero.YES


PROBES = 16


def is_zero(e, hooks: dict | None = None, seed: int = 0, tol: float = 1e-9) -> ZeroTest:
    """Decide whether ``e`` vanishes identically.

    YES and NO are exact inside the rational-function fragment.  Outside it
    the expression is probed numerically at 16 points: a clearly nonzero
    value gives NO with the point as witness, otherwise the answer is
    UNKNOWN (never YES).
    """
    e = lift(e)
    nf = to_nf(e)
    if nf.is_zero():
        return ZeroTest(Zero.YES)
    names = sorted(nf.free_vars())
    if nf.is_rational():
        return _rational_witness(nf, names)
    expr = nf_expr(nf)
    hooks = _with_builtins(hooks)
    missing = expr.opaque_names() - set(hooks)
    if missing:
        return ZeroTest(Zero.UNKNOWN, detail=f"no numeric hook for {sorted(missing)}")
    rng = random.Random(seed)
    for k in range(PROBES):
        if k == 0:
            point = {n: 1.0 + 0j for n in names}
        else:
            point = {n: _annulus(rng) for n in names}
        try:
            val = evaluate(expr, point, hooks)
        except (EvalError, OverflowError, ZeroDivisionError, ValueError):
            continue
        if not cmath.isfinite(val):
            continue
        scale = max(1.0, _magnitude(expr, point, hooks))
        if abs(val) > tol * scale:
            return ZeroTest(Zero.NO, witness=point, value=val)
    return ZeroTest(Zero.UNKNOWN, detail="no nonzero value found at the probe points")


def _annulus(rng) -> complex:
    r = rng.uniform(0.5, 2.0)
    return cmath.rect(r, rng.uniform(0, 2 * cmath.pi))


def _magnitude(expr: Expr, point, hooks) -> float:
    terms = expr.args if isinstance(expr, Add) else (expr,)
    if isinstance(expr, Div) and isinstance(expr.num, Add):
        try:
            d = abs(evaluate(expr.den, point, hooks))
            return max(abs(evaluate(t, point, hooks)) for t in expr.num.args) / max(d, 1e-300)
        except (EvalError, OverflowError, ZeroDivisionError):
            return 1.0
    try:
        return max(abs(evaluate(t, point, hooks)) for t in terms)
    except (EvalError, OverflowError, ZeroDivisionError):
        return 1.0


def nf_expr(nf: NF) -> Expr:
    from .normal import from_nf

    return from_nf(nf)


def _rational_witness(nf: NF, names) -> ZeroTest:
    expr = nf_expr(nf)
    exact = not any(g.kind == "sqrt" for g in nf.gens())
    for k in range(200):
        point = {n: Fraction(k + 1 + 3 * j, 1 + j) for j, n in enumerate(names)}
        if exact:
            try:
                val = exact_value(expr, {n: Scalar(q) for n, q in point.items()})
            except EvalError:
                continue
            if val:
                return ZeroTest(Zero.NO, witness=point, value=complex(val))
        else:
            try:
                val = evaluate(expr, {n: float(q) for n, q in point.items()})
            except EvalError:
                continue
            if abs(val) > 1e-12:
                return ZeroTest(Zero.NO, witness=point, value=val)
    # a nonzero canonical rational function cannot vanish everywhere
    return ZeroTest(Zero.NO, detail="nonzero normal form")
