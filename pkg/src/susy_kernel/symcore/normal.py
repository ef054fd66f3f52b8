"""Canonical forms for expressions.

A normal form (``NF``) is a quotient of two polynomials whose generators are
even variables and transcendental atoms (``log``, ``sqrt``, named functions).
Exponentials are not generators: each monomial carries an exponent argument,
so ``exp(a)*exp(b)`` becomes one monomial with argument ``a + b``.

Canonical means: square-root generators appear at most linearly and never in
the denominator, numerator and denominator are coprime, and the leading term
of the denominator has coefficient 1 and no exponential factor.  Within the
rational-function fragment two expressions are equal iff their normal forms
are structurally equal.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm

from sympy import QQ, QQ_I, symbols
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyRing

from .expr import (Add, Const, Div, Exp, Expr, Log, Mul, Opaque, Pow, Sqrt,
                   SymbolicError, Var)
from .scalar import ONE, ZERO, Scalar, as_scalar

__all__ = ["NF", "Gen", "Mono", "to_nf", "from_nf", "normalize", "nf_subs"]

_RANK = {"var": 0, "sqrt": 1, "log": 2, "fn": 3}


class Gen:
    """A polynomial generator: a variable or a transcendental atom."""

    __slots__ = ("kind", "name", "order", "arg", "key", "_hash")

    def __init__(self, kind: str, name: str = "", order: int = 0, arg: "NF | None" = None):
        self.kind = kind
        self.name = name
        self.order = order
        self.arg = arg
        self.key = (_RANK[kind], name, order, arg.key if arg is not None else ())
        self._hash = hash(self.key)

    def __eq__(self, other):
        return isinstance(other, Gen) and self._hash == other._hash and self.key == other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Gen({self.kind}, {self.name!r}, {self.order}, {self.arg!r})"

    def to_expr(self) -> Expr:
        if self.kind == "var":
            return Var(self.name)
        arg = from_nf(self.arg)
        if self.kind == "sqrt":
            return Sqrt(arg)
        if self.kind == "log":
            return Log(arg)
        return Opaque(self.name, arg, self.order)

    def depends_on(self, var: str) -> bool:
        if self.kind == "var":
            return self.name == var
        return self.arg.depends_on(var)


class Mono:
    """Power product of generators times ``exp(exparg)``."""

    __slots__ = ("powers", "exparg", "key", "degree", "_hash")

    def __init__(self, powers: tuple = (), exparg: "NF | None" = None):
        if exparg is not None and exparg.is_zero():
            exparg = None
        self.powers = powers
        self.exparg = exparg
        self.key = (tuple((g.key, e) for g, e in powers), exparg.key if exparg is not None else ())
        self.degree = sum(e for _, e in powers)
        self._hash = hash(self.key)

    def __eq__(self, other):
        return self._hash == other._hash and self.key == other.key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Mono({self.powers!r}, {self.exparg!r})"

    @property
    def order_key(self):
        return (-self.degree, self.key)

    def __mul__(self, other: "Mono") -> "Mono":
        if not other.powers and other.exparg is None:
            return self
        if not self.powers and self.exparg is None:
            return other
        return _mono_mul(self, other)

    def with_exparg(self, exparg: "NF | None") -> "Mono":
        return Mono(self.powers, exparg)

    def exponent(self, gen: Gen) -> int:
        for g, e in self.powers:
            if g == gen:
                return e
        return 0


def _mono_from_dict(powers: dict, exparg) -> Mono:
    items = sorted(((g, e) for g, e in powers.items() if e), key=lambda ge: ge[0].key)
    return Mono(tuple(items), exparg)


@lru_cache(maxsize=65536)
def _mono_mul(a: Mono, b: Mono) -> Mono:
    powers = dict(a.powers)
    for g, e in b.powers:
        powers[g] = powers.get(g, 0) + e
    if a.exparg is None:
        exparg = b.exparg
    elif b.exparg is None:
        exparg = a.exparg
    else:
        exparg = a.exparg + b.exparg
    return _mono_from_dict(powers, exparg)


UNIT_MONO = Mono()


# ---------------------------------------------------------------------------
# polynomials as dicts Mono -> Scalar


def _padd(a: dict, b: dict, sign: int = 1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m)
        v = (c if sign > 0 else -c) if v is None else (v + c if sign > 0 else v - c)
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pmul(a: dict, b: dict) -> dict:
    if len(a) == 1 and UNIT_MONO in a:
        c = a[UNIT_MONO]
        return dict(b) if c.is_one() else {m: c * v for m, v in b.items()}
    if len(b) == 1 and UNIT_MONO in b:
        return _pmul(b, a)
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = m1 * m2
            v = out.get(m)
            v = c1 * c2 if v is None else v + c1 * c2
            if v:
                out[m] = v
            else:
                del out[m]
    return out


def _pscale(a: dict, c: Scalar, mono: Mono = UNIT_MONO) -> dict:
    if mono is UNIT_MONO:
        return {m: v * c for m, v in a.items()}
    return {m * mono: v * c for m, v in a.items()}


def _pkey(a: dict) -> tuple:
    return tuple(sorted((m.key, c.key) for m, c in a.items()))


def _leading(a: dict) -> Mono:
    return min(a, key=lambda m: m.order_key)


def _has_sqrt_power(a: dict) -> bool:
    return any(g.kind == "sqrt" and e >= 2 for m in a for g, e in m.powers)


def _sqrt_gens(a: dict) -> set:
    return {g for m in a for g, _ in m.powers if g.kind == "sqrt"}


# ---------------------------------------------------------------------------


class NF:
    """Canonical rational function; build with the constructors, not __init__."""

    __slots__ = ("num", "den", "_key", "_hash", "_expr")

    def __init__(self, num: dict, den: dict):
        self.num = num
        self.den = den
        self._key = None
        self._hash = None
        self._expr = None

    # construction -----------------------------------------------------
    @staticmethod
    def const(value) -> "NF":
        value = as_scalar(value)
        return NF({UNIT_MONO: value} if value else {}, {UNIT_MONO: ONE})

    @staticmethod
    def gen(g: Gen) -> "NF":
        return NF({Mono(((g, 1),)): ONE}, {UNIT_MONO: ONE})

    @staticmethod
    def var(name: str) -> "NF":
        return NF.gen(Gen("var", name))

    @staticmethod
    def exp(arg: "NF") -> "NF":
        return NF({Mono((), arg): ONE}, {UNIT_MONO: ONE})

    @staticmethod
    def poly(terms: dict) -> "NF":
        return _canonical(terms, {UNIT_MONO: ONE})

    # identity ---------------------------------------------------------
    @property
    def key(self):
        if self._key is None:
            self._key = (_pkey(self.num), _pkey(self.den))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, NF):
            return NotImplemented
        return self is other or (hash(self) == hash(other) and self.key == other.key)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        return f"NF({from_nf(self)})"

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.is_constant() and self.constant_value().is_one()

    def is_constant(self) -> bool:
        return _is_unit_den(self.den) and (not self.num or (len(self.num) == 1 and UNIT_MONO in self.num))

    def constant_value(self) -> Scalar | None:
        if not self.is_constant():
            return None
        return self.num.get(UNIT_MONO, ZERO)

    def is_polynomial(self) -> bool:
        return _is_unit_den(self.den)

    def gens(self) -> set:
        out = set()
        for part in (self.num, self.den):
            for m in part:
                out.update(g for g, _ in m.powers)
        return out

    def expargs(self) -> set:
        return {m.exparg for part in (self.num, self.den) for m in part if m.exparg is not None}

    def is_rational(self) -> bool:
        """True when only variables and rational-constant square roots occur."""
        if self.expargs():
            return False
        for g in self.gens():
            if g.kind == "var":
                continue
            if g.kind == "sqrt" and g.arg.is_constant() and g.arg.constant_value().is_real():
                continue
            return False
        return True

    def depends_on(self, var: str) -> bool:
        if any(g.depends_on(var) for g in self.gens()):
            return True
        return any(e.depends_on(var) for e in self.expargs())

    def free_vars(self) -> set:
        out = set()
        for g in self.gens():
            if g.kind == "var":
                out.add(g.name)
            else:
                out |= g.arg.free_vars()
        for e in self.expargs():
            out |= e.free_vars()
        return out

    # arithmetic -------------------------------------------------------
    def __add__(self, other: "NF") -> "NF":
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den or _pkey(self.den) == _pkey(other.den):
            if _is_unit_den(self.den):
                return _canonical(_padd(self.num, other.num), self.den, cancel=False)
            return _canonical(_padd(self.num, other.num), self.den)
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return _canonical(num, _pmul(self.den, other.den))

    def __neg__(self) -> "NF":
        return NF({m: -c for m, c in self.num.items()}, self.den)

    def __sub__(self, other: "NF") -> "NF":
        return self + (-other)

    def __mul__(self, other: "NF") -> "NF":
        if not self.num or not other.num:
            return ZERO_NF
        if self.is_constant():
            return other.scale(self.constant_value())
        if other.is_constant():
            return self.scale(other.constant_value())
        unit = _is_unit_den(self.den) and _is_unit_den(other.den)
        return _canonical(_pmul(self.num, other.num), _pmul(self.den, other.den), cancel=not unit)

    def scale(self, c: Scalar) -> "NF":
        if not c:
            return ZERO_NF
        if c.is_one():
            return self
        return NF({m: v * c for m, v in self.num.items()}, self.den)

    def inverse(self) -> "NF":
        if not self.num:
            raise SymbolicError("division by an identically-zero expression")
        return _canonical(dict(self.den), dict(self.num), cancel=False)

    def __truediv__(self, other: "NF") -> "NF":
        if not other.num:
            raise SymbolicError("division by an identically-zero expression")
        if other.is_constant():
            return self.scale(other.constant_value().inverse())
        return _canonical(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __pow__(self, k: int) -> "NF":
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE_NF, self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # calculus ---------------------------------------------------------
    def diff(self, var: str) -> "NF":
        if not self.depends_on(var):
            return ZERO_NF
        dn = _poly_diff(self.num, var)
        if _is_unit_den(self.den):
            return dn
        dd = _poly_diff(self.den, var)
        n, d = NF.poly_raw(self.num), NF.poly_raw(self.den)
        return (dn * d - n * dd) / (d * d)

    @staticmethod
    def poly_raw(terms: dict) -> "NF":
        return _canonical(dict(terms), {UNIT_MONO: ONE})


def _is_unit_den(den: dict) -> bool:
    return len(den) == 1 and den.get(UNIT_MONO) is not None and den[UNIT_MONO].is_one()


ZERO_NF = NF({}, {UNIT_MONO: ONE})
ONE_NF = NF({UNIT_MONO: ONE}, {UNIT_MONO: ONE})


def _gen_diff(g: Gen, var: str) -> NF:
    if g.kind == "var":
        return ONE_NF if g.name == var else ZERO_NF
    darg = g.arg.diff(var)
    if darg.is_zero():
        return ZERO_NF
    if g.kind == "log":
        return darg / g.arg
    if g.kind == "sqrt":
        return darg / (NF.gen(g).scale(Scalar(2)))
    from .functions import derivative_rule

    outer = derivative_rule(g.name)(from_nf(g.arg), g.order)
    return to_nf(outer) * darg


def _poly_diff(terms: dict, var: str) -> NF:
    total = ZERO_NF
    for m, c in terms.items():
        mono_nf = NF({m: c}, {UNIT_MONO: ONE})
        if m.exparg is not None:
            de = m.exparg.diff(var)
            if not de.is_zero():
                total = total + mono_nf * de
        for idx, (g, e) in enumerate(m.powers):
            dg = _gen_diff(g, var)
            if dg.is_zero():
                continue
            rest = list(m.powers)
            if e == 1:
                rest.pop(idx)
            else:
                rest[idx] = (g, e - 1)
            part = NF({Mono(tuple(rest), m.exparg): c * e}, {UNIT_MONO: ONE})
            total = total + part * dg
    return total


# ---------------------------------------------------------------------------
# canonicalization


def _canonical(num: dict, den: dict, cancel: bool = True) -> NF:
    if not num:
        return ZERO_NF
    if not den:
        raise SymbolicError("division by an identically-zero expression")
    if _has_sqrt_power(num) or _has_sqrt_power(den):
        n = _reduce_sqrt(num)
        d = _reduce_sqrt(den)
        return n / d
    sq = _sqrt_gens(den)
    if sq:
        s = max(sq, key=lambda g: g.key)
        with_s = {}
        without = {}
        for m, c in den.items():
            e = m.exponent(s)
            if e:
                rest = tuple((g, k) for g, k in m.powers if g != s)
                with_s[Mono(rest, m.exparg)] = c
            else:
                without[m] = c
        conj = _padd(without, _pmul(with_s, {Mono(((s, 1),)): ONE}), sign=-1)
        n = _canonical(_pmul(num, conj), {UNIT_MONO: ONE}, cancel=False)
        d = _canonical(_pmul(den, conj), {UNIT_MONO: ONE}, cancel=False)
        if not d.num:
            raise SymbolicError("denominator vanishes after rationalization")
        return n / d
    if len(den) == 1:
        return _monomial_den(num, den)
    if cancel:
        num, den = _gcd_cancel(num, den)
    return _unit_normalize(num, den)


def _reduce_sqrt(terms: dict) -> NF:
    total = ZERO_NF
    for m, c in terms.items():
        factor = ONE_NF
        powers = []
        for g, e in m.powers:
            if g.kind == "sqrt" and e >= 2:
                factor = factor * (g.arg ** (e // 2))
                if e % 2:
                    powers.append((g, 1))
            else:
                powers.append((g, e))
        total = total + NF({Mono(tuple(powers), m.exparg): c}, {UNIT_MONO: ONE}) * factor
    return total


def _monomial_den(num: dict, den: dict) -> NF:
    (dm, dc), = den.items()
    inv = dc.inverse()
    neg_exp = -dm.exparg if dm.exparg is not None else None
    # cancel common generator powers
    keep = []
    cancel = {}
    for g, e in dm.powers:
        low = min(m.exponent(g) for m in num)
        k = min(low, e)
        if k:
            cancel[g] = k
        if e - k:
            keep.append((g, e - k))
    out = {}
    for m, c in num.items():
        if cancel:
            powers = dict(m.powers)
            for g, k in cancel.items():
                powers[g] -= k
            m = _mono_from_dict(powers, m.exparg)
        if neg_exp is not None:
            ex = neg_exp if m.exparg is None else m.exparg + neg_exp
            m = m.with_exparg(ex)
        out[m] = c * inv
    return NF(out, {Mono(tuple(keep)): ONE})


def _unit_normalize(num: dict, den: dict) -> NF:
    lt = _leading(den)
    c = den[lt]
    if c.is_one() and lt.exparg is None:
        return NF(num, den)
    inv = c.inverse()
    if lt.exparg is None:
        return NF(_pscale(num, inv), _pscale(den, inv))
    shift = Mono((), -lt.exparg)
    return NF(_pscale(num, inv, shift), _pscale(den, inv, shift))


# -- gcd through sympy sparse polynomial rings ------------------------------


@lru_cache(maxsize=64)
def _ring(n: int, gaussian: bool):
    return PolyRing(symbols(f"x0:{n}"), QQ_I if gaussian else QQ, lex)


def _to_domain(c: Scalar, gaussian: bool):
    re = QQ(c.re.numerator, c.re.denominator)
    if not gaussian:
        return re
    return QQ_I(re, QQ(c.im.numerator, c.im.denominator))


def _from_domain(v, gaussian: bool) -> Scalar:
    if gaussian:
        return Scalar(_q(v.x), _q(v.y))
    return Scalar(_q(v))


def _q(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _exp_classes(terms_list):
    """Group exponential arguments into classes of rational multiples."""
    bases: list = []  # [base NF, ...]
    member: dict = {}  # exparg -> (class index, Fraction multiple)
    for terms in terms_list:
        for m in terms:
            e = m.exparg
            if e is None or e in member:
                continue
            for idx, b in enumerate(bases):
                q = (e / b).constant_value()
                if q is not None and q.is_real():
                    member[e] = (idx, q.re)
                    break
            else:
                member[e] = (len(bases), Fraction(1))
                bases.append(e)
    denoms = [1] * len(bases)
    for idx, q in member.values():
        denoms[idx] = lcm(denoms[idx], q.denominator)
    return bases, member, denoms


def _gcd_cancel(num: dict, den: dict):
    if len(num) == 1:
        return _monomial_gcd_cancel(num, den)
    gens = sorted({g for part in (num, den) for m in part for g, _ in m.powers}, key=lambda g: g.key)
    bases, member, denoms = _exp_classes((num, den))
    index = {g: k for k, g in enumerate(gens)}
    nvar = len(gens) + len(bases)
    if nvar == 0:
        return num, den
    gaussian = any(c.im for part in (num, den) for c in part.values())

    def encode(terms):
        vecs = {}
        for m, c in terms.items():
            v = [0] * nvar
            for g, e in m.powers:
                v[index[g]] = e
            if m.exparg is not None:
                idx, q = member[m.exparg]
                v[len(gens) + idx] = int(q * denoms[idx])
            vecs[tuple(v)] = c
        shift = [0] * len(bases)
        for j in range(len(bases)):
            shift[j] = min(v[len(gens) + j] for v in vecs)
        if any(shift):
            moved = {}
            for v, c in vecs.items():
                w = list(v)
                for j in range(len(bases)):
                    w[len(gens) + j] -= shift[j]
                moved[tuple(w)] = c
            vecs = moved
        return vecs, shift

    nvecs, nshift = encode(num)
    dvecs, dshift = encode(den)
    R = _ring(nvar, gaussian)
    p = R.from_dict({v: _to_domain(c, gaussian) for v, c in nvecs.items()})
    q = R.from_dict({v: _to_domain(c, gaussian) for v, c in dvecs.items()})
    g, pc, qc = p.cofactors(q)
    if g.is_ground:
        return num, den

    def decode(poly, extra_shift):
        out = {}
        for v, c in poly.items():
            powers = tuple((gens[k], v[k]) for k in range(len(gens)) if v[k])
            exparg = None
            for j, base in enumerate(bases):
                k = v[len(gens) + j] + extra_shift[j]
                if k:
                    term = base.scale(Scalar(Fraction(k, denoms[j])))
                    exparg = term if exparg is None else exparg + term
            out[Mono(powers, exparg)] = _from_domain(c, gaussian)
        return out

    rel = [a - b for a, b in zip(nshift, dshift)]
    return decode(pc, rel), decode(qc, [0] * len(bases))


def _monomial_gcd_cancel(num: dict, den: dict):
    (nm, nc), = num.items()
    cancel = {}
    for g, e in nm.powers:
        low = min(m.exponent(g) for m in den)
        k = min(low, e)
        if k:
            cancel[g] = k
    if not cancel:
        return num, den

    def strip(m):
        powers = dict(m.powers)
        for g, k in cancel.items():
            powers[g] -= k
        return _mono_from_dict(powers, m.exparg)

    return {strip(nm): nc}, {strip(m): c for m, c in den.items()}


# ---------------------------------------------------------------------------
# conversion between trees and normal forms


def to_nf(e: Expr) -> NF:
    cached = e._nf
    if cached is not None:
        return cached
    result = _to_nf(e)
    e._nf = result
    return result


def _to_nf(e: Expr) -> NF:
    if isinstance(e, Const):
        return NF.const(e.value)
    if isinstance(e, Var):
        return NF.var(e.name)
    if isinstance(e, Add):
        total = ZERO_NF
        for a in e.args:
            total = total + to_nf(a)
        return total
    if isinstance(e, Mul):
        total = ONE_NF
        for a in e.args:
            total = total * to_nf(a)
        return total
    if isinstance(e, Pow):
        base = to_nf(e.base)
        if e.exp < 0 and base.is_zero():
            raise SymbolicError("negative power of an identically-zero expression")
        return base ** e.exp
    if isinstance(e, Div):
        den = to_nf(e.den)
        if den.is_zero():
            raise SymbolicError("division by an identically-zero expression")
        return to_nf(e.num) / den
    if isinstance(e, Exp):
        arg = to_nf(e.arg)
        return ONE_NF if arg.is_zero() else NF.exp(arg)
    if isinstance(e, Log):
        arg = to_nf(e.arg)
        if arg.is_zero():
            raise SymbolicError("log of an identically-zero expression")
        if arg.is_one():
            return ZERO_NF
        return NF.gen(Gen("log", arg=arg))
    if isinstance(e, Sqrt):
        return _sqrt_nf(to_nf(e.arg))
    if isinstance(e, Opaque):
        from .functions import is_registered

        if not is_registered(e.name):
            raise SymbolicError(f"opaque function {e.name!r} is not registered")
        return NF.gen(Gen("fn", e.name, e.order, to_nf(e.arg)))
    raise TypeError(f"unknown expression node {type(e).__name__}")


def _sqrt_nf(arg: NF) -> NF:
    if arg.is_zero():
        return ZERO_NF
    c = arg.constant_value()
    if c is None:
        return NF.gen(Gen("sqrt", arg=arg))
    exact = c.sqrt_exact()
    if exact is not None:
        return NF.const(exact)
    if c.is_real():
        return _rational_sqrt_nf(c.re)
    return NF.gen(Gen("sqrt", arg=arg))


def _rational_sqrt_nf(q: Fraction) -> NF:
    """sqrt of a non-square rational as rational * product of sqrt(prime)."""
    from sympy import factorint

    factor = NF.const(Scalar(0, 1)) if q < 0 else ONE_NF
    q = abs(q)
    n = q.numerator * q.denominator
    outside = Fraction(1, q.denominator)
    for p, k in sorted(factorint(n).items()):
        outside *= p ** (k // 2)
        if k % 2:
            factor = factor * NF.gen(Gen("sqrt", arg=NF.const(p)))
    return factor.scale(Scalar(outside))


def from_nf(nf: NF) -> Expr:
    if nf._expr is not None:
        return nf._expr
    num = _poly_expr(nf.num)
    if _is_unit_den(nf.den):
        out = num
    else:
        out = Div(num, _poly_expr(nf.den))
    out._nf = nf
    nf._expr = out
    return out


def _poly_expr(terms: dict) -> Expr:
    if not terms:
        return Const(0)
    ordered = sorted(terms.items(), key=lambda mc: mc[0].order_key)
    parts = [_term_expr(m, c) for m, c in ordered]
    return parts[0] if len(parts) == 1 else Add(*parts)


def _term_expr(m: Mono, c: Scalar) -> Expr:
    factors = []
    for g, e in m.powers:
        base = g.to_expr()
        factors.append(base if e == 1 else Pow(base, e))
    if m.exparg is not None:
        factors.append(Exp(from_nf(m.exparg)))
    if not factors:
        return Const(c)
    if c.is_one():
        return factors[0] if len(factors) == 1 else Mul(*factors)
    return Mul(Const(c), *factors)


def normalize(e: Expr) -> Expr:
    """Canonical tree for ``e``; raises SymbolicError on zero denominators."""
    return from_nf(to_nf(e))


# ---------------------------------------------------------------------------
# substitution on normal forms


def nf_subs(nf: NF, mapping: dict) -> NF:
    """Replace variables by normal forms; raises SymbolicError on zero denominators."""
    if not mapping or not (nf.free_vars() & set(mapping)):
        return nf
    memo: dict = {}
    num = _subs_poly(nf.num, mapping, memo)
    if _is_unit_den(nf.den):
        return num
    den = _subs_poly(nf.den, mapping, memo)
    if den.is_zero():
        raise SymbolicError("denominator vanishes after substitution")
    return num / den


def _subs_gen(g: Gen, mapping, memo) -> NF:
    hit = memo.get(g)
    if hit is not None:
        return hit
    if g.kind == "var":
        out = mapping.get(g.name)
        if out is None:
            out = NF.gen(g)
    else:
        arg = nf_subs(g.arg, mapping)
        if arg is g.arg:
            out = NF.gen(g)
        elif g.kind == "sqrt":
            out = _sqrt_nf(arg)
        elif g.kind == "log":
            if arg.is_zero():
                raise SymbolicError("log of an identically-zero expression")
            out = ZERO_NF if arg.is_one() else NF.gen(Gen("log", arg=arg))
        else:
            out = NF.gen(Gen("fn", g.name, g.order, arg))
    memo[g] = out
    return out


def _subs_poly(terms: dict, mapping, memo) -> NF:
    total = ZERO_NF
    for m, c in terms.items():
        part = NF.const(c)
        for g, e in m.powers:
            part = part * (_subs_gen(g, mapping, memo) ** e)
        if m.exparg is not None:
            arg = nf_subs(m.exparg, mapping)
            if not arg.is_zero():
                part = part * NF.exp(arg)
        total = total + part
    return total
