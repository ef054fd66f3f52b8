"""Superfunctions, vector fields and 1-forms on an (m|n) chart.

A superfunction is a sum of even coefficients times odd monomials,
sum_I e_I(z) zeta^I, with I an increasing tuple of odd-coordinate indices.
Coefficients are kept as normal forms (``symcore.NF``).

Conventions:

* odd partial derivatives act from the left: d/dzeta_j (zeta_J g) removes
  zeta_j with sign (-1)^(number of indices of J before j);
* a vector field is sum_a X_a d/dx_a with coefficients written on the left;
* df = sum_a (d_a f) dx_a with the same left derivatives;
* the pairing puts the field coefficient first: <c dx_a, X_a d/dx_a> = X_a c,
  so that <df, X> = X(f) holds for every f and X;
* ``compose(F, G)`` means "apply G, then F" on points, so its pullback is
  G* after F*.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import factorial

from .symcore import expr as _E
from .symcore.expr import Expr, SymbolicError, lift
from .symcore.normal import NF, ONE_NF, ZERO_NF, from_nf, nf_subs, to_nf
from .symcore.parser import VarRegistry, parse
from .symcore.scalar import Scalar

__all__ = [
    "ChartSpec", "SuperFunction", "SuperVectorField", "SuperOneForm", "ChartMorphism",
    "ChartError", "apply_vf", "bracket", "exterior_d", "pair", "pullback_fn",
    "pullback_form", "compose", "identity_morphism", "parse_function",
    "parse_vector_field", "parse_one_form",
]


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class ChartSpec:
    even: tuple = ()
    odd: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "even", tuple(self.even))
        object.__setattr__(self, "odd", tuple(self.odd))
        names = self.even + self.odd
        if len(set(names)) != len(names):
            raise ChartError("coordinate names must be distinct")

    @property
    def m(self):
        return len(self.even)

    @property
    def n(self):
        return len(self.odd)

    @property
    def coords(self):
        return self.even + self.odd

    def registry(self, params=()) -> VarRegistry:
        return VarRegistry(self.even + tuple(p for p in params if p not in self.even), self.odd)

    def __str__(self):
        return f"({', '.join(self.even)} | {', '.join(self.odd)})"


def _sort_sign(indices):
    """(sorted tuple, sign) or (None, 0) when an index repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return tuple(sorted(idx)), sign


def _merge_sign(a: tuple, b: tuple) -> int:
    """Sign of zeta^a zeta^b -> zeta^(a+b) for disjoint sorted tuples."""
    swaps = 0
    for j in b:
        for i in a:
            if i > j:
                swaps += 1
    return -1 if swaps & 1 else 1


def _nf(value) -> NF:
    if isinstance(value, NF):
        return value
    return to_nf(lift(value))


class SuperFunction:
    """sum_I e_I zeta^I on a chart; ``terms`` maps sorted index tuples to NF."""

    __slots__ = ("chart", "terms", "_hash")

    def __init__(self, chart: ChartSpec, terms: dict | None = None):
        self.chart = chart
        clean = {}
        for I, c in (terms or {}).items():
            c = _nf(c)
            if not c.is_zero():
                clean[tuple(I)] = c
        self.terms = clean
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def const(cls, chart, value=1):
        return cls(chart, {(): _nf(value)})

    @classmethod
    def even(cls, chart, value):
        """An even function of the even coordinates (Expr, NF, number or text)."""
        if isinstance(value, str):
            value = parse(value, chart.registry())
            if any(v in chart.odd for v in value.free_vars()):
                return parse_function(value, chart)
        return cls(chart, {(): _nf(value)})

    @classmethod
    def coord(cls, chart, name: str):
        if name in chart.even:
            return cls(chart, {(): NF.var(name)})
        if name in chart.odd:
            return cls(chart, {(chart.odd.index(name),): ONE_NF})
        raise ChartError(f"{name!r} is not a coordinate of {chart}")

    @classmethod
    def zero(cls, chart):
        return cls(chart, {})

    # structure --------------------------------------------------------
    def coefficient(self, I=()) -> Expr:
        return from_nf(self.terms.get(tuple(I), ZERO_NF))

    def coeff_nf(self, I=()) -> NF:
        return self.terms.get(tuple(I), ZERO_NF)

    def reduced(self) -> NF:
        """The body: all odd coordinates set to zero."""
        return self.terms.get((), ZERO_NF)

    def parity(self) -> int | None:
        ps = {len(I) & 1 for I in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if not isinstance(other, SuperFunction):
            return SuperFunction(self.chart, {(): _nf(other)})
        if other.chart != self.chart:
            raise ChartError(f"chart mismatch: {self.chart} vs {other.chart}")
        return other

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for I, c in other.terms.items():
            out[I] = out[I] + c if I in out else c
        return SuperFunction(self.chart, out)

    __radd__ = __add__

    def __neg__(self):
        return SuperFunction(self.chart, {I: -c for I, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        out: dict = {}
        for I, a in self.terms.items():
            for J, b in other.terms.items():
                if set(I) & set(J):
                    continue
                c = a * b
                if _merge_sign(I, J) < 0:
                    c = -c
                K = tuple(sorted(I + J))
                out[K] = out[K] + c if K in out else c
        return SuperFunction(self.chart, out)

    def __rmul__(self, other):
        return self._check(other) * self

    def scale(self, c: NF) -> "SuperFunction":
        """Multiply by an even function of the even coordinates."""
        c = _nf(c)
        return SuperFunction(self.chart, {I: c * v for I, v in self.terms.items()})

    def inverse(self) -> "SuperFunction":
        """1/f by the geometric series over the nilpotent part."""
        body = self.reduced()
        if body.is_zero():
            raise SymbolicError("superfunction with zero reduced part is not invertible")
        binv = body.inverse()
        nil = SuperFunction(self.chart, {I: c for I, c in self.terms.items() if I})
        step = nil.scale(-binv)
        out = SuperFunction.const(self.chart, 1)
        power = out
        for _ in range(self.chart.n):
            power = power * step
            if not power:
                break
            out = out + power
        return out.scale(binv)

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = SuperFunction.const(self.chart, 1)
        for _ in range(k):
            out = out * self
        return out

    # calculus ---------------------------------------------------------
    def d_even(self, name: str) -> "SuperFunction":
        return SuperFunction(self.chart, {I: c.diff(name) for I, c in self.terms.items()})

    def d_odd(self, j: int) -> "SuperFunction":
        """Left derivative with respect to the j-th odd coordinate (0-based)."""
        out = {}
        for I, c in self.terms.items():
            if j in I:
                pos = I.index(j)
                K = I[:pos] + I[pos + 1:]
                out[K] = -c if pos & 1 else c
        return SuperFunction(self.chart, out)

    def map_coefficients(self, fn) -> "SuperFunction":
        return SuperFunction(self.chart, {I: fn(c) for I, c in self.terms.items()})

    # identity and text ------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, SuperFunction):
            try:
                other = self._check(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.chart, frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for I in sorted(self.terms, key=lambda I: (len(I), I)):
            c = from_nf(self.terms[I])
            odd = "*".join(self.chart.odd[j] for j in I)
            text, prec = c._str()
            if not I:
                piece = text
            elif c.is_constant() and c.constant_value().is_one():
                piece = odd
            elif c.is_constant() and c.constant_value() == -1:
                piece = "-" + odd
            else:
                real_const = c.is_constant() and c.constant_value().is_real()
                if prec < 2 and not real_const:
                    text = f"({text})"
                piece = f"{text}*{odd}"
            if parts and piece.startswith("-"):
                parts.append(" - " + piece[1:])
            elif parts:
                parts.append(" + " + piece)
            else:
                parts.append(piece)
        return "".join(parts)

    def __repr__(self):
        return f"SuperFunction({self})"


# ---------------------------------------------------------------------------
# literal syntax


def _interpret(tree: Expr, chart: ChartSpec) -> SuperFunction:
    odd_names = set(chart.odd)
    if not (tree.free_vars() & odd_names):
        return SuperFunction(chart, {(): to_nf(tree)})
    if isinstance(tree, _E.Var):
        return SuperFunction.coord(chart, tree.name)
    if isinstance(tree, _E.Add):
        out = SuperFunction.zero(chart)
        for a in tree.args:
            out = out + _interpret(a, chart)
        return out
    if isinstance(tree, _E.Mul):
        out = SuperFunction.const(chart, 1)
        for a in tree.args:
            out = out * _interpret(a, chart)
        return out
    if isinstance(tree, _E.Pow):
        return _interpret(tree.base, chart) ** tree.exp
    if isinstance(tree, _E.Div):
        return _interpret(tree.num, chart) / _interpret(tree.den, chart)
    if isinstance(tree, (_E.Exp, _E.Log, _E.Sqrt, _E.Opaque)):
        return _apply_analytic(tree, _interpret(tree.arg, chart))
    raise ChartError(f"cannot interpret {tree}")


def _apply_analytic(node: Expr, arg: SuperFunction) -> SuperFunction:
    """F(b + n) = sum_k F^(k)(b) n^k / k! for the analytic atom F of ``node``."""
    from .symcore.calculus import diff

    chart = arg.chart
    if arg.parity() not in (0, None) or any(len(I) & 1 for I in arg.terms):
        raise ChartError("analytic functions need an even argument")
    b = arg.reduced()
    n = arg - SuperFunction(chart, {(): b})
    t = "_t"
    outer = type(node)(_E.Var(t)) if not isinstance(node, _E.Opaque) else _E.Opaque(node.name, _E.Var(t), node.order)
    out = SuperFunction.zero(chart)
    power = SuperFunction.const(chart, 1)
    deriv = outer
    for k in range(chart.n // 2 + 1):
        coeff = nf_subs(to_nf(deriv), {t: b})
        out = out + power.scale(coeff.scale(Scalar(1, 0) / factorial(k)))
        power = power * n
        if not power:
            break
        deriv = diff(deriv, t)
    return out


def parse_function(text, chart: ChartSpec, params=()) -> SuperFunction:
    """Read a superfunction literal such as ``f0(z) + f1(z)*zeta``."""
    tree = text if isinstance(text, Expr) else parse(text, chart.registry(params))
    return _interpret(tree, chart)


_DVEC = re.compile(r"d/d([A-Za-z_][A-Za-z0-9_]*)")


def parse_vector_field(text: str, chart: ChartSpec, params=()) -> "SuperVectorField":
    """Read ``d/dzeta + zeta*d/dz``; coefficients stand to the left of d/dx."""
    marks = {}

    def repl(m):
        name = m.group(1)
        if name not in chart.coords:
            raise ChartError(f"d/d{name}: {name!r} is not a coordinate")
        token = f"D__{name}"
        marks[token] = name
        return token

    tree = parse(_DVEC.sub(repl, text), chart.registry(tuple(params) + tuple(marks)))
    coeffs = _linear_in(tree, marks, chart)
    return SuperVectorField.from_dict(chart, coeffs)


def parse_one_form(text: str, chart: ChartSpec, params=()) -> "SuperOneForm":
    """Read ``dz - zeta*dzeta``; coefficients stand to the left of dx."""
    marks = {f"d{c}": c for c in chart.coords if f"d{c}" not in chart.coords}
    tree = parse(text, chart.registry(tuple(params) + tuple(marks)))
    coeffs = _linear_in(tree, marks, chart)
    return SuperOneForm.from_dict(chart, coeffs)


def _linear_in(tree: Expr, marks: dict, chart) -> dict:
    """Split a tree that is linear in the marker symbols into coefficients."""
    out: dict = {}

    def add(name, f):
        out[name] = out[name] + f if name in out else f

    def walk(node, left: SuperFunction, right_scale: SuperFunction | None):
        hits = node.free_vars() & set(marks)
        if not hits:
            raise ChartError(f"term {node} carries no differential")
        if isinstance(node, _E.Var):
            f = left if right_scale is None else left * right_scale
            add(marks[node.name], f)
            return
        if isinstance(node, _E.Add):
            for a in node.args:
                walk(a, left, right_scale)
            return
        if isinstance(node, _E.Mul):
            idx = [k for k, a in enumerate(node.args) if a.free_vars() & set(marks)]
            if len(idx) != 1:
                raise ChartError("each term must contain exactly one differential")
            k = idx[0]
            before = SuperFunction.const(chart, 1)
            for a in node.args[:k]:
                before = before * _interpret(a, chart)
            after = node.args[k + 1:]
            if after and any(_interpret(a, chart).parity() != 0 for a in after):
                raise ChartError("write odd coefficients to the left of the differential")
            scale = right_scale
            for a in after:
                f = _interpret(a, chart)
                scale = f if scale is None else f * scale
            walk(node.args[k], left * before, scale)
            return
        if isinstance(node, _E.Div):
            if node.den.free_vars() & set(marks):
                raise ChartError("differentials cannot appear in a denominator")
            inv = _interpret(node.den, chart).inverse()
            walk(node.num, left, inv if right_scale is None else inv * right_scale)
            return
        raise ChartError(f"cannot read {node} as a linear combination of differentials")

    walk(tree, SuperFunction.const(chart, 1), None)
    return out


# ---------------------------------------------------------------------------
# vector fields and forms


class _Linear:
    """Shared storage: one SuperFunction per coordinate, even coordinates first."""

    __slots__ = ("chart", "coeffs")

    def __init__(self, chart: ChartSpec, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) != chart.m + chart.n:
            raise ChartError("one coefficient per coordinate is required")
        for c in coeffs:
            if c.chart != chart:
                raise ChartError("coefficient lives on another chart")
        self.chart = chart
        self.coeffs = coeffs

    @classmethod
    def from_dict(cls, chart, mapping: dict):
        coeffs = []
        for name in chart.coords:
            f = mapping.get(name)
            if f is None:
                f = SuperFunction.zero(chart)
            elif not isinstance(f, SuperFunction):
                f = parse_function(f, chart) if isinstance(f, str) else SuperFunction.even(chart, f)
            coeffs.append(f)
        return cls(chart, coeffs)

    def coefficient(self, name: str) -> SuperFunction:
        return self.coeffs[self.chart.coords.index(name)]

    def _check(self, other):
        if type(other) is not type(self) or other.chart != self.chart:
            raise ChartError("chart mismatch")
        return other

    def __add__(self, other):
        other = self._check(other)
        return type(self)(self.chart, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return type(self)(self.chart, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, f):
        """Left multiplication by a superfunction or scalar."""
        if not isinstance(f, SuperFunction):
            f = SuperFunction(self.chart, {(): _nf(f)})
        return type(self)(self.chart, [f * a for a in self.coeffs])

    def __eq__(self, other):
        return type(other) is type(self) and self.chart == other.chart and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((type(self).__name__, self.coeffs))

    def is_zero(self):
        return not any(self.coeffs)

    def _render(self, symbol):
        parts = []
        for name, c in zip(self.chart.coords, self.coeffs):
            if not c:
                continue
            text = str(c)
            if text == "1":
                piece = symbol(name)
            elif text == "-1":
                piece = "-" + symbol(name)
            else:
                if len(c.terms) > 1 or " " in text:
                    text = f"({text})"
                piece = f"{text}*{symbol(name)}"
            if parts and piece.startswith("-"):
                parts.append(" - " + piece[1:])
            elif parts:
                parts.append(" + " + piece)
            else:
                parts.append(piece)
        return "".join(parts) or "0"


class SuperVectorField(_Linear):
    """sum_a X_a d/dx_a with left coefficients."""

    __slots__ = ()

    def parity(self) -> int | None:
        ps = set()
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            p = c.parity()
            if p is None:
                return None
            shift = 0 if k < self.chart.m else 1
            ps.add((p + shift) & 1)
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    @classmethod
    def partial(cls, chart, name: str):
        return cls.from_dict(chart, {name: SuperFunction.const(chart, 1)})

    def __call__(self, f: SuperFunction) -> SuperFunction:
        return apply_vf(self, f)

    def __str__(self):
        return self._render(lambda n: f"d/d{n}")

    def __repr__(self):
        return f"SuperVectorField({self})"


class SuperOneForm(_Linear):
    """sum_a dx_a c_a, coefficients on the right so that d f = sum dx_a (d_a f)
    with left derivatives.  Printed as c*dx for readability."""

    __slots__ = ()

    def __str__(self):
        return self._render(lambda n: f"d{n}")

    def __repr__(self):
        return f"SuperOneForm({self})"


def apply_vf(X: SuperVectorField, f: SuperFunction) -> SuperFunction:
    if X.chart != f.chart:
        raise ChartError("vector field and function live on different charts")
    out = SuperFunction.zero(f.chart)
    m = f.chart.m
    for k, a in enumerate(X.coeffs):
        if not a:
            continue
        d = f.d_even(f.chart.even[k]) if k < m else f.d_odd(k - m)
        if d:
            out = out + a * d
    return out


def bracket(X: SuperVectorField, Y: SuperVectorField) -> SuperVectorField:
    """[X, Y] = XY - (-1)^(|X||Y|) YX, read off from its values on coordinates."""
    if X.chart != Y.chart:
        raise ChartError("vector fields live on different charts")
    px, py = X.parity(), Y.parity()
    if px is None or py is None:
        raise ChartError("bracket needs homogeneous vector fields")
    sign = -1 if px & py else 1
    coeffs = []
    for a, b in zip(X.coeffs, Y.coeffs):
        xy = apply_vf(X, b)
        yx = apply_vf(Y, a)
        coeffs.append(xy - yx if sign > 0 else xy + yx)
    return SuperVectorField(X.chart, coeffs)


def exterior_d(f: SuperFunction) -> SuperOneForm:
    chart = f.chart
    coeffs = [f.d_even(name) for name in chart.even]
    coeffs += [f.d_odd(j) for j in range(chart.n)]
    return SuperOneForm(chart, coeffs)


def pair(w: SuperOneForm, X: SuperVectorField) -> SuperFunction:
    """<w, X> = sum_a X_a c_a (field coefficient first)."""
    if w.chart != X.chart:
        raise ChartError("form and field live on different charts")
    out = SuperFunction.zero(w.chart)
    for c, e in zip(w.coeffs, X.coeffs):
        if c and e:
            out = out + e * c
    return out


# ---------------------------------------------------------------------------
# morphisms


class ChartMorphism:
    """A map source -> target stored as pullbacks of the target coordinates."""

    __slots__ = ("source", "target", "images")

    def __init__(self, source: ChartSpec, target: ChartSpec, images):
        if isinstance(images, dict):
            missing = [c for c in target.coords if c not in images]
            if missing:
                raise ChartError(f"no image for target coordinates {missing}")
            images = [images[c] for c in target.coords]
        images = tuple(
            im if isinstance(im, SuperFunction) else parse_function(im, source) if isinstance(im, str)
            else SuperFunction.even(source, im)
            for im in images
        )
        if len(images) != target.m + target.n:
            raise ChartError("one image per target coordinate is required")
        for k, im in enumerate(images):
            if im.chart != source:
                raise ChartError("images must be superfunctions on the source chart")
            want = 0 if k < target.m else 1
            if im and im.parity() != want:
                name = target.coords[k]
                raise ChartError(f"image of {name!r} must be {'even' if want == 0 else 'odd'}")
        self.source = source
        self.target = target
        self.images = images

    def image(self, name: str) -> SuperFunction:
        return self.images[self.target.coords.index(name)]

    def reduced_map(self) -> dict:
        return {name: from_nf(self.images[k].reduced()) for k, name in enumerate(self.target.even)}

    def __eq__(self, other):
        return (isinstance(other, ChartMorphism) and self.source == other.source
                and self.target == other.target and self.images == other.images)

    def __hash__(self):
        return hash((self.source, self.target, self.images))

    def __str__(self):
        body = ", ".join(f"{n} -> {im}" for n, im in zip(self.target.coords, self.images))
        return f"{self.source} -> {self.target}: {body}"

    __repr__ = __str__

    def describe(self) -> dict:
        """Both readings: the coordinate map and the pullback assignment."""
        return {
            "map": {n: str(im) for n, im in zip(self.target.coords, self.images)},
            "pullbacks": [f"{n}* = {im}" for n, im in zip(self.target.coords, self.images)],
        }


def identity_morphism(chart: ChartSpec) -> ChartMorphism:
    return ChartMorphism(chart, chart, [SuperFunction.coord(chart, c) for c in chart.coords])


def _pullback_even(F: ChartMorphism, c: NF) -> SuperFunction:
    """Pull back an even coefficient by Taylor expansion in the nilpotent parts."""
    src = F.source
    bodies = {}
    nils = []
    for k, name in enumerate(F.target.even):
        im = F.images[k]
        body = im.reduced()
        bodies[name] = body
        nil = SuperFunction(src, {I: v for I, v in im.terms.items() if I})
        if nil and c.depends_on(name):
            nils.append((name, nil))
    base = nf_subs(c, bodies)
    out = SuperFunction(src, {(): base})
    if not nils:
        return out
    max_order = src.n // 2
    # multivariate Taylor: sum over multi-indices with total order <= max_order
    names = [n for n, _ in nils]
    stack = [((), c, SuperFunction.const(src, 1), 1)]
    while stack:
        alpha, deriv, mono, fact = stack.pop()
        start = alpha[-1] if alpha else 0
        if len(alpha) >= max_order:
            continue
        for k in range(start, len(names)):
            d = deriv.diff(names[k])
            if d.is_zero():
                continue
            m = mono * nils[k][1]
            if not m:
                continue
            new_alpha = alpha + (k,)
            mult = sum(1 for a in new_alpha if a == k)
            f = fact * mult
            val = nf_subs(d, bodies).scale(Scalar(1) / f)
            out = out + m.scale(val)
            stack.append((new_alpha, d, m, f))
    return out


def pullback_fn(F: ChartMorphism, f: SuperFunction) -> SuperFunction:
    if f.chart != F.target:
        raise ChartError("function does not live on the target chart")
    src = F.source
    out = SuperFunction.zero(src)
    odd_images = F.images[F.target.m:]
    for I, c in f.terms.items():
        term = _pullback_even(F, c)
        for j in I:
            term = term * odd_images[j]
            if not term:
                break
        out = out + term
    return out


def pullback_form(F: ChartMorphism, w: SuperOneForm) -> SuperOneForm:
    """F*(sum dx_a c_a) = sum d(F* x_a) F*(c_a)."""
    if w.chart != F.target:
        raise ChartError("form does not live on the target chart")
    out = SuperOneForm(F.source, [SuperFunction.zero(F.source)] * (F.source.m + F.source.n))
    for c, im in zip(w.coeffs, F.images):
        if not c:
            continue
        out = out + _right(exterior_d(im), pullback_fn(F, c))
    return out


def _right(w: SuperOneForm, f: SuperFunction) -> SuperOneForm:
    return SuperOneForm(w.chart, [a * f for a in w.coeffs])


def compose(F: ChartMorphism, G: ChartMorphism) -> ChartMorphism:
    """F after G: points go through G first, so pullbacks are G* after F*."""
    if G.target != F.source:
        raise ChartError("target of the first map must be the source of the second")
    return ChartMorphism(G.source, F.target, [pullback_fn(G, im) for im in F.images])


def pushforward(F: ChartMorphism, F_inv: ChartMorphism, X: SuperVectorField) -> SuperVectorField:
    """F_* X on the target chart, given an explicit inverse."""
    tgt = F.target
    coeffs = []
    for name in tgt.coords:
        y = SuperFunction.coord(tgt, name)
        coeffs.append(pullback_fn(F_inv, apply_vf(X, pullback_fn(F, y))))
    return SuperVectorField(tgt, coeffs)


def evaluate_at_point(f: SuperFunction, point: dict, alg):
    """Value of a rational superfunction at a Lambda_N point.

    ``point`` maps every coordinate name to a Grassmann element of the right
    parity; coefficients may only involve the even coordinates rationally.
    """
    from .grassmann import ginv

    out = alg.zero()
    for I, c in f.terms.items():
        val = _eval_nf(c, point, alg, ginv)
        for j in I:
            val = val * point[f.chart.odd[j]]
        out = out + val
    return out


def _eval_nf(c: NF, point, alg, ginv):
    def poly(terms):
        acc = alg.zero()
        for m, coeff in terms.items():
            if m.exparg is not None:
                raise ChartError("exponentials cannot be evaluated at Grassmann points")
            v = alg.scalar(coeff)
            for g, e in m.powers:
                if g.kind != "var":
                    raise ChartError("only rational coefficients can be evaluated at Grassmann points")
                v = v * point[g.name] ** e
            acc = acc + v
        return acc

    num = poly(c.num)
    if len(c.den) == 1 and next(iter(c.den.values())).is_one() and next(iter(c.den)).degree == 0:
        return num
    den = poly(c.den)
    if not den.is_invertible():
        raise SymbolicError("denominator is not invertible at this point")
    return num * ginv(den)


def apply_morphism_to_point(F: ChartMorphism, point: dict, alg) -> dict:
    """Image of a Lambda_N point of the source under F, as target coordinates."""
    return {name: evaluate_at_point(im, point, alg) for name, im in zip(F.target.coords, F.images)}
