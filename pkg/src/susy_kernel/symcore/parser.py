"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' power)?
    power  := '-'? int | '(' '-'? int ')'
    base   := number | ident | ident '(' expr ')' | '(' expr ')' | '-' factor

Numbers are decimal rationals; a number directly followed by ``i`` is an
imaginary literal and ``i`` alone is the imaginary unit.  Identifiers may end
in primes, which count derivatives of a named function (``wp'(z)``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .expr import Add, Const, Div, Exp, Expr, Log, Mul, Opaque, Pow, Sqrt, Var
from .functions import is_registered
from .scalar import Scalar

__all__ = ["ParseError", "VarRegistry", "parse"]


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class VarRegistry:
    """Even variable names in scope, in a fixed order."""

    names: tuple = ()
    odd: tuple = field(default=())

    def __post_init__(self):
        names = tuple(self.names)
        odd = tuple(self.odd)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "odd", odd)
        everything = names + odd
        if len(set(everything)) != len(everything):
            raise ValueError("variable names must be unique")
        for n in everything:
            if n in _BUILTINS or n == "i":
                raise ValueError(f"{n!r} is reserved")

    def __contains__(self, name):
        return name in self.names or name in self.odd

    def with_names(self, *extra) -> "VarRegistry":
        return VarRegistry(self.names + tuple(n for n in extra if n not in self), self.odd)


_BUILTINS = {"exp": Exp, "log": Log, "sqrt": Sqrt}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)(?P<imag>i(?![A-Za-z0-9_]))?"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group("num") is not None:
            start = m.start("num")
            value = Scalar(_decimal(m.group("num")))
            if m.group("imag"):
                value = value * Scalar(0, 1)
            tokens.append(("num", value, start))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append((m.group("op"), m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("eof", None, n))
    return tokens


def _decimal(text: str):
    from fractions import Fraction

    return Fraction(text)


class _Parser:
    def __init__(self, text: str, registry: VarRegistry | None):
        self.tokens = _tokenize(text)
        self.k = 0
        self.registry = registry

    def peek(self):
        return self.tokens[self.k]

    def take(self, kind=None):
        tok = self.tokens[self.k]
        if kind is not None and tok[0] != kind:
            found = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ParseError(f"expected {kind!r}, found {found}", tok[2])
        self.k += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek()[0] in "+-":
            op = self.take()[0]
            t = self.term()
            terms.append(t if op == "+" else Mul(Const(-1), t))
        return terms[0] if len(terms) == 1 else Add(*terms)

    def term(self) -> Expr:
        node = self.factor()
        factors = [node]
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            if op == "*":
                factors.append(rhs)
            else:
                lhs = factors[0] if len(factors) == 1 else Mul(*factors)
                factors = [Div(lhs, rhs)]
        return factors[0] if len(factors) == 1 else Mul(*factors)

    def factor(self) -> Expr:
        base = self.base()
        if self.peek()[0] == "^":
            self.take()
            base = Pow(base, self.power())
        return base

    def power(self) -> int:
        paren = self.peek()[0] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[0] == "-":
            self.take()
            sign = -1
        tok = self.take("num")
        value = tok[1]
        if value.im or value.re.denominator != 1:
            raise ParseError("exponent must be an integer", tok[2])
        if paren:
            self.take(")")
        return sign * int(value.re)

    def base(self) -> Expr:
        tok = self.peek()
        kind = tok[0]
        if kind == "num":
            self.take()
            return Const(tok[1])
        if kind == "-":
            self.take()
            return Mul(Const(-1), self.factor())
        if kind == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind == "ident":
            self.take()
            return self.identifier(tok[1], tok[2])
        found = "end of input" if kind == "eof" else repr(tok[1])
        raise ParseError(f"unexpected {found}", tok[2])

    def identifier(self, name: str, pos: int) -> Expr:
        if self.peek()[0] == "(":
            bare = name.rstrip("'")
            order = len(name) - len(bare)
            if bare in _BUILTINS and not order:
                self.take()
                arg = self.expr()
                self.take(")")
                return _BUILTINS[bare](arg)
            if not is_registered(bare):
                raise ParseError(f"unknown function {name!r}", pos)
            self.take()
            arg = self.expr()
            self.take(")")
            return Opaque(bare, arg, order)
        if name == "i":
            return Const(Scalar(0, 1))
        if "'" in name or name in _BUILTINS:
            raise ParseError(f"{name!r} must be applied to an argument", pos)
        if self.registry is not None and name not in self.registry:
            raise ParseError(f"unknown identifier {name!r}", pos)
        return Var(name)


def parse(text: str, registry: VarRegistry | None = None) -> Expr:
    """Parse ``text`` into a raw expression tree.

    With ``registry=None`` any identifier is accepted as a variable.
    """
    return _Parser(text, registry).parse()
