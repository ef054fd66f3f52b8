"""Differentiation, substitution and restricted antiderivatives."""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .expr import (Add, Const, Div, Exp, Expr, Log, Mul, Opaque, Pow, Sqrt,
                   Var, lift)
from .functions import derivative_rule
from .normal import NF, UNIT_MONO, ZERO_NF, Gen, Mono, from_nf, normalize, to_nf
from .scalar import ONE, ZERO, Scalar

__all__ = ["diff", "diff_tree", "subs", "antiderivative", "nf_diff"]


def diff_tree(e: Expr, v: str) -> Expr:
    """Structural derivative; the result is a raw, unsimplified tree."""
    if isinstance(e, Const):
        return Const(0)
    if isinstance(e, Var):
        return Const(1 if e.name == v else 0)
    if isinstance(e, Add):
        return Add(*(diff_tree(a, v) for a in e.args))
    if isinstance(e, Mul):
        parts = []
        for k, a in enumerate(e.args):
            rest = list(e.args)
            rest[k] = diff_tree(a, v)
            parts.append(Mul(*rest))
        return Add(*parts) if parts else Const(0)
    if isinstance(e, Pow):
        if e.exp == 0:
            return Const(0)
        return Mul(Const(e.exp), Pow(e.base, e.exp - 1), diff_tree(e.base, v))
    if isinstance(e, Div):
        dn, dd = diff_tree(e.num, v), diff_tree(e.den, v)
        return Div(Add(Mul(dn, e.den), Mul(Const(-1), e.num, dd)), Pow(e.den, 2))
    if isinstance(e, Exp):
        return Mul(e, diff_tree(e.arg, v))
    if isinstance(e, Log):
        return Div(diff_tree(e.arg, v), e.arg)
    if isinstance(e, Sqrt):
        return Div(diff_tree(e.arg, v), Mul(Const(2), e))
    if isinstance(e, Opaque):
        return Mul(derivative_rule(e.name)(e.arg, e.order), diff_tree(e.arg, v))
    raise TypeError(f"unknown expression node {type(e).__name__}")


def diff(e, v: str) -> Expr:
    return normalize(diff_tree(lift(e), v))


def nf_diff(e, v: str) -> Expr:
    """Derivative computed on the normal form (second, independent route)."""
    return from_nf(to_nf(lift(e)).diff(v))


def _subs_tree(e: Expr, mapping: dict) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, (Add, Mul)):
        return type(e)(*(_subs_tree(a, mapping) for a in e.args))
    if isinstance(e, Pow):
        return Pow(_subs_tree(e.base, mapping), e.exp)
    if isinstance(e, Div):
        return Div(_subs_tree(e.num, mapping), _subs_tree(e.den, mapping))
    if isinstance(e, (Exp, Log, Sqrt)):
        return type(e)(_subs_tree(e.arg, mapping))
    if isinstance(e, Opaque):
        return Opaque(e.name, _subs_tree(e.arg, mapping), e.order)
    raise TypeError(f"unknown expression node {type(e).__name__}")


def subs(e, mapping: dict) -> Expr:
    """Replace variables by expressions and normalize.

    Raises SymbolicError when a denominator becomes identically zero.
    """
    e = lift(e)
    mapping = {k: lift(val) for k, val in mapping.items() if k in e.free_vars()}
    if not mapping:
        return normalize(e)
    return normalize(_subs_tree(e, mapping))


# ---------------------------------------------------------------------------
# antiderivatives


def antiderivative(e, v: str | None = None, allow_log: bool = False) -> Expr | None:
    """An F with dF/dv = e, or None outside the supported class.

    Supported: polynomials in v times exp(a*v + b) (a free of v),
    rational functions of v whose denominators split into linear factors
    over Q(i), and v^-m exp(a*v + b).  Terms needing a logarithm or the
    exponential integral Ei are only integrated when ``allow_log`` is set.
    """
    e = lift(e)
    nf = to_nf(e)
    if v is None:
        names = sorted(nf.free_vars())
        if len(names) > 1:
            raise ValueError("integration variable is ambiguous; pass v")
        v = names[0] if names else "z"
    if nf.is_zero():
        return Const(0)
    if not nf.depends_on(v):
        return from_nf(nf * NF.var(v))
    if nf.is_polynomial():
        out = _integrate_exp_poly(nf.num, v)
    else:
        out = _integrate_rational(nf, v, allow_log)
        if out is None and allow_log:
            out = _integrate_exp_laurent(nf, v)
    return None if out is None else from_nf(out)


def _split_mono(m: Mono, v: str):
    """(k, rest) with m = v^k * rest, or None if rest depends on v badly."""
    k = 0
    rest = []
    for g, e in m.powers:
        if g.kind == "var" and g.name == v:
            k = e
        elif g.depends_on(v):
            return None
        else:
            rest.append((g, e))
    return k, tuple(rest)


def _integrate_exp_poly(terms: dict, v: str) -> NF | None:
    total = ZERO_NF
    vnf = NF.var(v)
    for m, c in terms.items():
        split = _split_mono(m, v)
        if split is None:
            return None
        k, rest = split
        coeff = NF({Mono(rest): c}, {UNIT_MONO: ONE})
        if m.exparg is None or not m.exparg.depends_on(v):
            piece = coeff * NF({Mono((), m.exparg): ONE}, {UNIT_MONO: ONE}) * (vnf ** (k + 1))
            total = total + piece.scale(Scalar(Fraction(1, k + 1)))
            continue
        a = m.exparg.diff(v)
        if a.depends_on(v) or a.is_zero():
            return None
        expo = NF.exp(m.exparg)
        # int v^k e^{a v} = e^{a v} sum_j (-1)^j k!/(k-j)! v^(k-j) / a^(j+1)
        s = ZERO_NF
        for j in range(k + 1):
            w = Scalar((-1) ** j * factorial(k) // factorial(k - j))
            s = s + (vnf ** (k - j)) * (a ** (-(j + 1))).scale(w)
        total = total + coeff * expo * s
    return total


def _univariate(terms: dict, v: str):
    """Coefficient list (low to high) of a polynomial purely in v, else None."""
    coeffs: dict[int, Scalar] = {}
    for m, c in terms.items():
        if m.exparg is not None:
            return None
        k = 0
        for g, e in m.powers:
            if g.kind == "var" and g.name == v:
                k = e
            else:
                return None
        coeffs[k] = c
    top = max(coeffs)
    return [coeffs.get(j, ZERO) for j in range(top + 1)]


def _poly_divmod(a: list, b: list):
    a = list(a)
    q = [ZERO] * max(len(a) - len(b) + 1, 1)
    lead_inv = b[-1].inverse()
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        f = a[-1] * lead_inv
        q[shift] = f
        for j, bj in enumerate(b):
            a[shift + j] = a[shift + j] - f * bj
        a.pop()
    while a and not a[-1]:
        a.pop()
    return q, a


def _taylor_shift(p: list, r: Scalar) -> list:
    """Coefficients of p(r + t) in t."""
    out = list(p)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + r * out[j + 1]
    return out


def _series_div(num: list, den: list, order: int) -> list:
    out = []
    inv = den[0].inverse()
    num = list(num) + [ZERO] * order
    for k in range(order):
        acc = num[k]
        for j in range(1, min(k, len(den) - 1) + 1):
            acc = acc - den[j] * out[k - j]
        out.append(acc * inv)
    return out


def _linear_roots(den: list):
    """[(root, multiplicity)] if den splits into linear factors over Q(i)."""
    from sympy import Poly, QQ_I, Symbol, factor_list

    x = Symbol("x")
    coeffs = [QQ_I(_q(c.re), _q(c.im)) for c in reversed(den)]
    poly = Poly.from_list(coeffs, x, domain=QQ_I)
    _, factors = factor_list(poly)
    roots = []
    for f, mult in factors:
        if f.degree() != 1:
            return None
        a, b = f.rep.to_list()
        r = QQ_I.convert(-b) / QQ_I.convert(a)
        roots.append((Scalar(_fr(r.x), _fr(r.y)), mult))
    return roots


def _q(f: Fraction):
    from sympy import QQ

    return QQ(f.numerator, f.denominator)


def _fr(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


def _integrate_rational(nf: NF, v: str, allow_log: bool) -> NF | None:
    num = _univariate(nf.num, v)
    den = _univariate(nf.den, v)
    if num is None or den is None:
        return None
    quot, rem = _poly_divmod(num, den)
    vnf = NF.var(v)
    total = ZERO_NF
    for k, c in enumerate(quot):
        if c:
            total = total + (vnf ** (k + 1)).scale(c * Scalar(Fraction(1, k + 1)))
    if not rem:
        return total
    roots = _linear_roots(den)
    if roots is None:
        return None
    lead = den[-1]
    for r, mult in roots:
        # cofactor g = den / (lead * (v - r)^mult), expanded around r
        g = [lead]
        for s, m2 in roots:
            if s == r:
                continue
            for _ in range(m2):
                g = _mul_linear(g, s)
        h = _series_div(_taylor_shift(rem, r), _taylor_shift(g, r), mult)
        shifted = vnf - NF.const(r)
        for j, cj in enumerate(h):
            if not cj:
                continue
            power = mult - j  # cj / (v - r)^power
            if power == 1:
                if not allow_log:
                    return None
                total = total + NF.gen(Gen("log", arg=shifted)).scale(cj)
            else:
                total = total + (shifted ** (1 - power)).scale(cj * Scalar(Fraction(1, 1 - power)))
    return total


def _mul_linear(p: list, s: Scalar) -> list:
    """p(v) * (v - s)."""
    out = [ZERO] * (len(p) + 1)
    for j, c in enumerate(p):
        out[j + 1] = out[j + 1] + c
        out[j] = out[j] - s * c
    return out


def _integrate_exp_laurent(nf: NF, v: str) -> NF | None:
    """Terms c * v^n * exp(a*v + b) over a denominator that is a power of v."""
    if len(nf.den) != 1:
        return None
    (dm, dc), = nf.den.items()
    if dm.exparg is not None or any(not (g.kind == "var" and g.name == v) for g, _ in dm.powers):
        return None
    d = dm.exponent(Gen("var", name=v)) if dm.powers else 0
    total = ZERO_NF
    vnf = NF.var(v)
    for m, c in nf.num.items():
        split = _split_mono(m, v)
        if split is None:
            return None
        k, rest = split
        coeff = NF({Mono(rest): c * dc.inverse()}, {UNIT_MONO: ONE})
        n = k - d
        if m.exparg is None or not m.exparg.depends_on(v):
            expo = NF({Mono((), m.exparg): ONE}, {UNIT_MONO: ONE})
            if n == -1:
                total = total + coeff * expo * NF.gen(Gen("log", arg=vnf))
            else:
                total = total + coeff * expo * (vnf ** (n + 1)).scale(Scalar(Fraction(1, n + 1)))
            continue
        a = m.exparg.diff(v)
        if a.depends_on(v) or a.is_zero():
            return None
        if n >= 0:
            piece = _integrate_exp_poly({Mono(((Gen("var", name=v), n),) if n else (), m.exparg): ONE}, v)
        else:
            piece = _exp_over_power(-n, a, m.exparg, v)
        if piece is None:
            return None
        total = total + coeff * piece
    return total


def _exp_over_power(m: int, a: NF, exparg: NF, v: str) -> NF:
    """int v^-m exp(a v + b) dv, reduced by parts down to Ei."""
    vnf = NF.var(v)
    expo = NF.exp(exparg)
    if m == 1:
        av = a * vnf
        return NF.exp(exparg - av) * to_nf(Opaque("Ei", from_nf(av)))
    # int v^-m E = -v^(1-m) E/(m-1) + a/(m-1) int v^(1-m) E
    inv = Scalar(Fraction(1, m - 1))
    return -(vnf ** (1 - m) * expo).scale(inv) + (a * _exp_over_power(m - 1, a, exparg, v)).scale(inv)
