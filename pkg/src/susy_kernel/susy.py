"""SUSY-1 structures on 1|1 charts, automorphisms of C^{1|1}, moduli reduction.

A structure is stored through a chosen odd generator D on each chart.  On a
1|1 chart with coordinates (z, zeta) every odd field has the shape
D = f(z) d/dzeta + g(z) zeta d/dz, and

    D^2 = [D, D]/2 = f g d/dz + g f' zeta d/dzeta.

D and D^2 form a frame exactly when f and g are units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .atlas import Atlas
from .superfn import (ChartError, ChartMorphism, ChartSpec, SuperFunction,
                      SuperOneForm, SuperVectorField, apply_vf, bracket,
                      compose, pullback_fn, pullback_form)
from .symcore import Expr, Scalar, Sqrt, antiderivative, lift
from .symcore.normal import NF, ONE_NF, from_nf, to_nf

__all__ = [
    "STD_CHART", "SusyError", "SusyVerdict", "is_susy", "d_squared", "frame_parts",
    "CanonicalCoordinates", "canonical_coordinates", "susy_omega", "standard_field",
    "SusyAutomorphismCandidate", "AutomorphismVerdict", "is_susy_automorphism",
    "classify_c11_automorphism", "elliptic_action_generators", "Tau",
    "reduce_to_fundamental_domain", "SusyStructure", "verify_susy_structure",
    "unit_status",
]

STD_CHART = ChartSpec(("z",), ("zeta",))
CANON_CHART = ChartSpec(("w",), ("eta",))


class SusyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# units


def unit_status(c: NF, invertible=()) -> str | None:
    """None when c is a unit, otherwise a short reason.

    Units are nonzero constants times exponentials times integer powers of
    the variables listed in ``invertible`` (coordinates inverted on the
    chart).  Anything else either vanishes somewhere or has a pole.
    """
    if c.is_zero():
        return "identically zero"
    invertible = set(invertible)
    for part, label in ((c.num, "vanishes"), (c.den, "has a pole")):
        if len(part) != 1:
            return f"{label} somewhere (not a monomial unit)"
        (m, _), = part.items()
        for g, _ in m.powers:
            if g.kind == "var" and g.name in invertible:
                continue
            if g.kind != "var" and not g.arg.free_vars():
                continue
            return f"{label} where {g.to_expr()} = 0"
    return None


# ---------------------------------------------------------------------------
# frame condition


def _one_one(chart: ChartSpec):
    if chart.m != 1 or chart.n != 1:
        raise SusyError("expected a 1|1 chart")
    return chart.even[0], chart.odd[0]


def frame_parts(D: SuperVectorField):
    """(f, g) with D = f d/dzeta + g zeta d/dz."""
    z, zeta = _one_one(D.chart)
    if D.parity() != 1:
        raise SusyError("D must be an odd vector field")
    cz, czeta = D.coeffs
    f = czeta.coeff_nf(())
    g = cz.coeff_nf((0,))
    return f, g


def d_squared(D: SuperVectorField) -> SuperVectorField:
    """D^2 = [D, D]/2."""
    B = bracket(D, D)
    half = Scalar(Fraction(1, 2))
    return SuperVectorField(D.chart, [c.scale(NF.const(half)) for c in B.coeffs])


@dataclass
class SusyVerdict:
    ok: bool
    f: str
    g: str
    d_squared: str
    witness: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"verdict": "pass" if self.ok else "fail", "f": self.f, "g": self.g,
                "d_squared": self.d_squared, "witness": self.witness}


def is_susy(D: SuperVectorField, invertible=()) -> SusyVerdict:
    """Frame test for (D, D^2) in the basis (d/dzeta, d/dz).

    The coefficient matrix [[f, g zeta], [g f' zeta, f g]] reduces to
    diag(f, f g), so the frame condition is: f and g are both units.
    """
    f, g = frame_parts(D)
    D2 = d_squared(D)
    out = dict(f=str(from_nf(f)), g=str(from_nf(g)), d_squared=str(D2))
    for name, c in (("f", f), ("g", g)):
        reason = unit_status(c, invertible)
        if reason:
            return SusyVerdict(False, witness=f"{name} = {from_nf(c)} {reason}", **out)
    return SusyVerdict(True, **out)


def standard_field(chart: ChartSpec = STD_CHART, sign: int = 1) -> SuperVectorField:
    """d/dzeta + sign * zeta d/dz."""
    z, zeta = _one_one(chart)
    return SuperVectorField(chart, [SuperFunction.coord(chart, zeta).scale(NF.const(sign)),
                                    SuperFunction.const(chart, 1)])


# ---------------------------------------------------------------------------
# canonical coordinates


@dataclass
class CanonicalCoordinates:
    h: Expr | None
    w: Expr | None
    morphism: ChartMorphism | None
    residuals: dict = field(default_factory=dict)
    global_injective: bool = False
    mode: str = "symbolic"
    quadrature: dict | None = None

    @property
    def exact(self) -> bool:
        return self.mode == "symbolic" and all(v == "0" for v in self.residuals.values())

    def to_json(self):
        out = {"mode": self.mode, "h": str(self.h) if self.h is not None else None,
               "w": str(self.w) if self.w is not None else None,
               "residuals": self.residuals,
               "scope": "global" if self.global_injective else "local only - not globally injective"}
        if self.quadrature:
            out["quadrature"] = self.quadrature
        return out


def _is_affine(w: NF, z: str) -> bool:
    if not w.is_polynomial() or w.expargs():
        return False
    d = w.diff(z)
    return d.is_constant() and not d.is_zero()


def canonical_coordinates(D: SuperVectorField, invertible=(), numeric: bool = False) -> CanonicalCoordinates:
    """Coordinates (w, eta) = (w(z), h(z) zeta) with D = d/deta + eta d/dw.

    Solves f h = 1 and g w' = h, so h = 1/f and w is an antiderivative of
    1/(f g).  The certificate recomputes D on the new coordinates:
    D(w) - eta and D(eta) - 1 must both normalize to zero.
    """
    verdict = is_susy(D, invertible)
    if not verdict:
        raise SusyError(f"not a SUSY generator: {verdict.witness}")
    z, zeta = _one_one(D.chart)
    f, g = frame_parts(D)
    h = f.inverse()
    integrand = (f * g).inverse()
    w_expr = antiderivative(from_nf(integrand), z, allow_log=True)
    if w_expr is None:
        if not numeric:
            raise SusyError(f"no antiderivative of {from_nf(integrand)} in the supported class")
        return CanonicalCoordinates(
            from_nf(h), None, None, mode="quadrature",
            quadrature={"integrand": str(from_nf(integrand)), "variable": z,
                        "base_point": "0", "rule": "w(z) = integral of the integrand from the base point"},
        )
    w = to_nf(w_expr)
    chart = D.chart
    eta = SuperFunction.coord(chart, zeta).scale(h)
    wf = SuperFunction(chart, {(): w})
    F = ChartMorphism(chart, CANON_CHART, [wf, eta])
    r1 = apply_vf(D, wf) - eta
    r2 = apply_vf(D, eta) - SuperFunction.const(chart, 1)
    residuals = {"D(w) - eta": str(r1), "D(eta) - 1": str(r2)}
    return CanonicalCoordinates(from_nf(h), w_expr, F, residuals, _is_affine(w, z))


def transformed_field(cc: CanonicalCoordinates, D: SuperVectorField) -> SuperVectorField | None:
    """D written in the (w, eta) chart, when D's values there are functions of eta alone."""
    if cc.morphism is None:
        return None
    coeffs = []
    for im in cc.morphism.images:
        v = apply_vf(D, im)
        # values are 1 and eta by the certificate; re-express in (w, eta)
        if v == SuperFunction.const(D.chart, 1):
            coeffs.append(SuperFunction.const(CANON_CHART, 1))
        elif v == cc.morphism.images[1]:
            coeffs.append(SuperFunction.coord(CANON_CHART, "eta"))
        else:
            return None
    return SuperVectorField(CANON_CHART, coeffs)


# ---------------------------------------------------------------------------
# the dual form and automorphisms


def susy_omega(chart: ChartSpec = STD_CHART) -> SuperOneForm:
    """dz - zeta dzeta, whose kernel is spanned by d/dzeta + zeta d/dz."""
    z, zeta = _one_one(chart)
    return SuperOneForm(chart, [SuperFunction.const(chart, 1), -SuperFunction.coord(chart, zeta)])


@dataclass(frozen=True)
class SusyAutomorphismCandidate:
    """z -> f(z), zeta -> g(z) zeta on the standard chart."""

    f: Expr
    g: Expr

    @classmethod
    def parse(cls, f: str, g: str, params=()):
        reg = STD_CHART.registry(params)
        from .symcore import normalize, parse
        ef, eg = normalize(parse(f, reg)), normalize(parse(g, reg))
        odd = (ef.free_vars() | eg.free_vars()) & set(STD_CHART.odd)
        if odd:
            raise SusyError(f"f and g must be functions of z only, got {sorted(odd)}")
        return cls(ef, eg)

    @classmethod
    def from_morphism(cls, F: ChartMorphism):
        _one_one(F.source)
        _one_one(F.target)
        fz, fzeta = F.images
        if set(fz.terms) - {()} or set(fzeta.terms) - {(0,)}:
            raise SusyError("expected the shape z -> f(z), zeta -> g(z) zeta")
        return cls(from_nf(fz.coeff_nf(())), from_nf(fzeta.coeff_nf((0,))))

    def morphism(self) -> ChartMorphism:
        c = STD_CHART
        return ChartMorphism(c, c, [SuperFunction(c, {(): to_nf(lift(self.f))}),
                                    SuperFunction(c, {(0,): to_nf(lift(self.g))})])

    def __str__(self):
        M = self.morphism()
        return f"(z, zeta) -> ({M.images[0]}, {M.images[1]})"


@dataclass
class AutomorphismVerdict:
    t: Expr | None
    t_from_f: str
    t_from_g: str
    residual_f: str
    residual_g: str
    reason: str = ""

    @property
    def ok(self):
        return self.t is not None

    def to_json(self):
        return {"verdict": "pass" if self.ok else "fail", "t": str(self.t) if self.t is not None else None,
                "f_prime": self.t_from_f, "g_squared": self.t_from_g,
                "residual_f": self.residual_f, "residual_g": self.residual_g, "reason": self.reason}


def is_susy_automorphism(F: SusyAutomorphismCandidate, invertible=()) -> AutomorphismVerdict:
    """t with F*(omega) = t omega, checked once with t = f' and once with t = g^2.

    Both routes must leave a zero residual.  t must also be a unit, since
    F*(omega) = t omega with t vanishing somewhere means F is not invertible
    there.
    """
    if isinstance(F, ChartMorphism):
        F = SusyAutomorphismCandidate.from_morphism(F)
    M = F.morphism()
    w = susy_omega()
    pulled = pullback_form(M, w)
    f = to_nf(lift(F.f))
    g = to_nf(lift(F.g))
    t_f = f.diff("z")
    t_g = g * g
    res_f = _form_residual(pulled, t_f, w)
    res_g = _form_residual(pulled, t_g, w)
    out = dict(t_from_f=str(from_nf(t_f)), t_from_g=str(from_nf(t_g)),
               residual_f=str(res_f), residual_g=str(res_g))
    if not res_f.is_zero() or not res_g.is_zero():
        return AutomorphismVerdict(None, reason="F*(omega) is not t*omega with t = f' = g^2", **out)
    reason = unit_status(t_f, invertible)
    if reason:
        return AutomorphismVerdict(None, reason=f"t = {from_nf(t_f)} {reason}; F is not invertible", **out)
    return AutomorphismVerdict(from_nf(t_f), **out)


def _form_residual(pulled: SuperOneForm, t: NF, w: SuperOneForm) -> SuperOneForm:
    tw = SuperOneForm(w.chart, [c.scale(t) for c in w.coeffs])
    return pulled - tw


def classify_c11_automorphism(F: SusyAutomorphismCandidate):
    """(a, b, sign) for F = (a z + b, sign * sqrt(a) zeta), or None.

    a and b come back as Scalars when constant and as Exprs when they
    involve parameters.  sign is '+' when g equals the principal sqrt(a).
    """
    if isinstance(F, ChartMorphism):
        F = SusyAutomorphismCandidate.from_morphism(F)
    f = to_nf(lift(F.f))
    g = to_nf(lift(F.g))
    if not f.is_polynomial() or not g.is_polynomial() or f.expargs() or g.expargs():
        return None
    if not is_susy_automorphism(F).ok:
        return None
    a = f.diff("z")
    if a.depends_on("z") or g.depends_on("z"):
        # cannot happen for polynomials passing the check; kept as a guard
        return None
    b = f - a * NF.var("z")
    root = to_nf(Sqrt(from_nf(a)))
    if g == root:
        sign = "+"
    elif g == -root:
        sign = "-"
    else:
        return None
    return _plain(a), _plain(b), sign


def _plain(c: NF):
    v = c.constant_value()
    return v if v is not None else from_nf(c)


# ---------------------------------------------------------------------------
# genus one


@dataclass(frozen=True)
class Tau:
    value: Scalar

    def __post_init__(self):
        if not self.value.im > 0:
            raise SusyError("tau must have positive imaginary part")

    @classmethod
    def parse(cls, text) -> "Tau":
        if isinstance(text, Tau):
            return text
        if isinstance(text, Scalar):
            return cls(text)
        if isinstance(text, complex):
            return cls(Scalar(Fraction(text.real), Fraction(text.imag)))
        from .symcore import normalize, parse
        nf = to_nf(normalize(parse(str(text).replace(" ", ""), None)))
        v = nf.constant_value()
        if v is None:
            raise SusyError(f"tau must be a constant, got {text!r}")
        return cls(v)

    def __complex__(self):
        return complex(float(self.value.re), float(self.value.im))

    def __str__(self):
        return str(self.value)


def elliptic_action_generators(tau, s_a: int = 1, s_b: int = 1):
    """A = (z + 1, s_a zeta), B = (z + tau, s_b zeta)."""
    tau = Tau.parse(tau)
    if s_a not in (1, -1) or s_b not in (1, -1):
        raise SusyError("signs must be +1 or -1")
    z = NF.var("z")
    A = SusyAutomorphismCandidate(from_nf(z + ONE_NF), lift(s_a))
    B = SusyAutomorphismCandidate(from_nf(z + NF.const(tau.value)), lift(s_b))
    return A, B


def commute(A: SusyAutomorphismCandidate, B: SusyAutomorphismCandidate) -> bool:
    MA, MB = A.morphism(), B.morphism()
    return compose(MA, MB) == compose(MB, MA)


def _mat_mul(a, b):
    return ((a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]))


def _psl_normal(g):
    (a, b), (c, d) = g
    if c < 0 or (c == 0 and d < 0):
        return ((-a, -b), (-c, -d))
    return g


def mobius(g, tau: Scalar) -> Scalar:
    (a, b), (c, d) = g
    return (Scalar(a) * tau + Scalar(b)) / (Scalar(c) * tau + Scalar(d))


def reduce_to_fundamental_domain(tau):
    """(tau', gamma) with tau' = gamma.tau in the closed fundamental domain.

    Exact rational arithmetic.  Boundary representatives: on |tau'| = 1
    the branch Re(tau') <= 0 is taken, and Re(tau') = 1/2 is moved to -1/2.
    """
    t = Tau.parse(tau).value
    half = Fraction(1, 2)
    gamma = ((1, 0), (0, 1))
    for _ in range(10_000):
        n = math.floor(t.re + half)
        if n:
            t = t - Scalar(n)
            gamma = _mat_mul(((1, -n), (0, 1)), gamma)
        if t.norm() < 1:
            t = Scalar(-1) / t
            gamma = _mat_mul(((0, -1), (1, 0)), gamma)
            continue
        break
    else:  # pragma: no cover - the loop terminates for Im(tau) > 0
        raise SusyError("reduction did not terminate")
    if t.re == half:
        t = t - Scalar(1)
        gamma = _mat_mul(((1, -1), (0, 1)), gamma)
    if t.norm() == 1 and t.re > 0:
        t = Scalar(-1) / t
        gamma = _mat_mul(((0, -1), (1, 0)), gamma)
    return Tau(t), _psl_normal(gamma)


def in_fundamental_domain(t: Scalar) -> bool:
    return abs(t.re) <= Fraction(1, 2) and t.norm() >= 1 and t.im > 0


# ---------------------------------------------------------------------------
# structures on atlases


@dataclass
class SusyStructure:
    atlas: Atlas
    generators: dict                     # chart name -> odd SuperVectorField
    units: dict = field(default_factory=dict)   # (i, j) -> h_ij

    def to_json(self):
        return {"generators": {k: str(v) for k, v in sorted(self.generators.items())},
                "units": {f"{i}->{j}": str(h) for (i, j), h in sorted(self.units.items())}}


@dataclass
class StructureReport:
    passed: bool
    structure: SusyStructure | None
    failures: list

    def to_json(self):
        out = {"verdict": "pass" if self.passed else "fail", "failures": self.failures}
        if self.structure is not None:
            out.update(self.structure.to_json())
        return out


def verify_susy_structure(A: Atlas, generators: dict, invertible: dict | None = None) -> StructureReport:
    """Check each D_i is a SUSY generator and D_i = h_ij * phi_ij^*(D_j) on overlaps.

    h_ij is read off as D_i(phi* eta_j) / phi*(D_j eta_j) and then tested on
    every coordinate of chart j.
    """
    invertible = invertible or {}
    failures = []
    for name, D in generators.items():
        v = is_susy(D, invertible.get(name, ()))
        if not v:
            failures.append({"chart": name, "check": "frame", "witness": v.witness})
    units = {}
    for (i, j), F in A.transitions.items():
        Di, Dj = generators[i], generators[j]
        eta = SuperFunction.coord(F.target, F.target.odd[0])
        den = pullback_fn(F, apply_vf(Dj, eta))
        try:
            h = apply_vf(Di, pullback_fn(F, eta)) * den.inverse()
        except (ZeroDivisionError, ChartError, ValueError) as exc:
            failures.append({"overlap": [i, j], "check": "unit", "witness": str(exc)})
            continue
        bad = []
        for x in F.target.coords:
            xf = SuperFunction.coord(F.target, x)
            lhs = apply_vf(Di, pullback_fn(F, xf))
            rhs = h * pullback_fn(F, apply_vf(Dj, xf))
            if lhs != rhs:
                bad.append(f"{x}: {lhs - rhs}")
        if bad:
            failures.append({"overlap": [i, j], "check": "transform", "witness": "; ".join(bad)})
        else:
            units[(i, j)] = h
    S = SusyStructure(A, dict(generators), units)
    return StructureReport(not failures, S, failures)


def standard_structure(A: Atlas, signs: dict | None = None) -> dict:
    """d/dxi + sign * xi d/du on every 1|1 chart of A."""
    signs = signs or {}
    return {name: standard_field(c, signs.get(name, 1)) for name, c in A.charts.items()}
