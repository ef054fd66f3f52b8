"""Expression trees for even holomorphic scalars.

Node constructors build raw trees exactly as written (the parser relies on
this).  The arithmetic operators on ``Expr`` instead return canonical trees,
so ``a * b`` is already normalized while ``Mul(a, b)`` is not.
"""

from __future__ import annotations

from .scalar import Scalar, as_scalar

__all__ = [
    "Expr", "Const", "Var", "Add", "Mul", "Pow", "Div", "Exp", "Log", "Sqrt",
    "Opaque", "lift", "SymbolicError",
]


class SymbolicError(ArithmeticError):
    """Raised for identically-zero denominators, log(0) and similar."""


_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 4, 5


class Expr:
    __slots__ = ("_hash", "_nf")

    def __init__(self):
        self._hash = None
        self._nf = None

    # structural identity ---------------------------------------------
    def _fields(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        if self.__hash__() != other.__hash__():
            return False
        return self._fields() == other._fields()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((type(self).__name__,) + self._fields())
        return self._hash

    def __repr__(self):
        name = type(self).__name__
        return f"{name}({', '.join(repr(f) for f in self._fields())})"

    def __str__(self):
        return self._str()[0]

    def _str(self) -> tuple[str, int]:
        raise NotImplementedError

    def children(self) -> tuple["Expr", ...]:
        return ()

    def free_vars(self) -> frozenset[str]:
        out = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Var):
                out.add(node.name)
            stack.extend(node.children())
        return frozenset(out)

    def opaque_names(self) -> frozenset[str]:
        out = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, Opaque):
                out.add(node.hook_name)
            stack.extend(node.children())
        return frozenset(out)

    # canonicalizing arithmetic ---------------------------------------
    @property
    def nf(self):
        if self._nf is None:
            from .normal import to_nf

            self._nf = to_nf(self)
        return self._nf

    def _binary(self, other, op):
        from .normal import from_nf

        other = lift(other)
        return from_nf(op(self.nf, other.nf))

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __radd__(self, other):
        return lift(other) + self

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return lift(other) - self

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return lift(other) * self

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return lift(other) / self

    def __neg__(self):
        from .normal import from_nf

        return from_nf(-self.nf)

    def __pow__(self, k):
        from .normal import from_nf

        if not isinstance(k, int):
            raise TypeError("only integer powers; use Sqrt for square roots")
        return from_nf(self.nf ** k)

    def is_constant(self) -> bool:
        return self.nf.is_constant()

    def constant_value(self) -> Scalar | None:
        return self.nf.constant_value()


def lift(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(as_scalar(value))


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = as_scalar(value)

    def _fields(self):
        return (self.value,)

    def _str(self):
        v = self.value
        text = str(v)
        if v.im and v.re:
            return text, _PREC_ATOM  # already parenthesized
        if text.startswith("-"):
            return text, _PREC_ADD
        if "/" in text:
            return text, _PREC_MUL
        if v.im and "*" in text:
            return text, _PREC_MUL
        return text, _PREC_ATOM


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name

    def _fields(self):
        return (self.name,)

    def _str(self):
        return self.name, _PREC_ATOM


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, *args):
        super().__init__()
        if len(args) == 1 and isinstance(args[0], (list, tuple)):
            args = tuple(args[0])
        self.args = tuple(lift(a) for a in args)

    def _fields(self):
        return self.args

    def children(self):
        return self.args

    def _str(self):
        if not self.args:
            return "0", _PREC_ATOM
        parts = []
        for k, arg in enumerate(self.args):
            text, prec = arg._str()
            if prec < _PREC_ADD:
                text = f"({text})"
            if k and text.startswith("-"):
                parts.append(f" - {text[1:]}")
            elif k:
                parts.append(f" + {text}")
            else:
                parts.append(text)
        return "".join(parts), _PREC_ADD


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, *args):
        super().__init__()
        if len(args) == 1 and isinstance(args[0], (list, tuple)):
            args = tuple(args[0])
        self.args = tuple(lift(a) for a in args)

    def _fields(self):
        return self.args

    def children(self):
        return self.args

    def _str(self):
        if not self.args:
            return "1", _PREC_ATOM
        args = list(self.args)
        negate = False
        if len(args) > 1 and isinstance(args[0], Const) and args[0].value == -1:
            negate = True
            args = args[1:]
        parts = []
        lead_prec = _PREC_MUL
        for k, arg in enumerate(args):
            text, prec = arg._str()
            if k == 0 and isinstance(arg, Const):
                lead_prec = prec
            elif prec < _PREC_MUL:
                text = f"({text})"
            parts.append(text)
        body = "*".join(parts)
        if negate:
            return "-" + body, _PREC_ADD
        if len(parts) == 1:
            return body, args[0]._str()[1]
        return body, min(lead_prec, _PREC_MUL)


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp: int):
        super().__init__()
        if not isinstance(exp, int):
            raise TypeError("Pow exponent must be an integer")
        self.base = lift(base)
        self.exp = exp

    def _fields(self):
        return (self.base, self.exp)

    def children(self):
        return (self.base,)

    def _str(self):
        text, prec = self.base._str()
        if prec < _PREC_ATOM:
            text = f"({text})"
        exp = str(self.exp) if self.exp >= 0 else f"({self.exp})"
        return f"{text}^{exp}", _PREC_POW


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        super().__init__()
        self.num = lift(num)
        self.den = lift(den)

    def _fields(self):
        return (self.num, self.den)

    def children(self):
        return (self.num, self.den)

    def _str(self):
        ntext, nprec = self.num._str()
        dtext, dprec = self.den._str()
        if nprec < _PREC_MUL and not isinstance(self.num, Const):
            ntext = f"({ntext})"
        if dprec <= _PREC_MUL:
            dtext = f"({dtext})"
        return f"{ntext}/{dtext}", _PREC_MUL


class _Unary(Expr):
    __slots__ = ("arg",)
    fname = ""

    def __init__(self, arg):
        super().__init__()
        self.arg = lift(arg)

    def _fields(self):
        return (self.arg,)

    def children(self):
        return (self.arg,)

    def _str(self):
        return f"{self.fname}({self.arg})", _PREC_ATOM


class Exp(_Unary):
    __slots__ = ()
    fname = "exp"


class Log(_Unary):
    __slots__ = ()
    fname = "log"


class Sqrt(_Unary):
    __slots__ = ()
    fname = "sqrt"


class Opaque(Expr):
    """A named analytic function applied to an argument.

    ``order`` counts derivatives, so ``Opaque("wp", z, 1)`` is the
    derivative of the Weierstrass function and prints as ``wp'(z)``.
    """

    __slots__ = ("name", "arg", "order")

    def __init__(self, name: str, arg, order: int = 0):
        super().__init__()
        self.name = name
        self.arg = lift(arg)
        self.order = order

    def _fields(self):
        return (self.name, self.arg, self.order)

    def children(self):
        return (self.arg,)

    @property
    def hook_name(self) -> str:
        return self.name + "'" * self.order

    def _str(self):
        return f"{self.hook_name}({self.arg})", _PREC_ATOM
