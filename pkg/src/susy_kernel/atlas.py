"""Glued chart systems, line-bundle cocycles and theta characteristics.

A transition ``transitions[(i, j)]`` is a ChartMorphism from chart i to
chart j defined on the overlap; its images are the pullbacks of chart j's
coordinates written in chart i's coordinates.  The compatibility checks
are

    compose(phi_ji, phi_ij) = id_i              (pairwise inverse)
    compose(phi_jk, phi_ij) = phi_ik            (triple overlaps)

A line-bundle cocycle stores g_ij as a function of chart i's coordinate,
and satisfies g_ik = (g_jk o phi_ij) * g_ij.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import permutations

from .superfn import (ChartError, ChartMorphism, ChartSpec, SuperFunction,
                      compose, identity_morphism, parse_function)
from .symcore import Expr, Scalar, Sqrt, SymbolicError, lift
from .symcore.normal import NF, ONE_NF, from_nf, nf_subs, to_nf

__all__ = [
    "Atlas", "CocycleReport", "verify_cocycle", "build_projective_atlas",
    "build_pi_line_atlas", "LineBundleCocycle", "ThetaCharacteristic",
    "canonical_cocycle", "odd_part_cocycle", "cocycle_square", "cocycle_sqrt",
    "cocycle_product", "degree", "theta_witness", "build_supermanifold_from_theta",
    "MAX_CHARTS", "AtlasError",
]

MAX_CHARTS = 6
SCHEMA = 1


class AtlasError(ValueError):
    pass


@dataclass
class Atlas:
    charts: dict                      # name -> ChartSpec, insertion ordered
    transitions: dict                 # (i, j) -> ChartMorphism
    overlaps: dict = field(default_factory=dict)  # (i, j) -> constraint text
    label: str = ""

    def transition(self, i, j) -> ChartMorphism:
        if i == j:
            return identity_morphism(self.charts[i])
        try:
            return self.transitions[(i, j)]
        except KeyError:
            raise AtlasError(f"no transition from chart {i} to chart {j}") from None

    def names(self):
        return list(self.charts)

    def with_transition(self, i, j, morphism: ChartMorphism) -> "Atlas":
        trans = dict(self.transitions)
        trans[(i, j)] = morphism
        return Atlas(dict(self.charts), trans, dict(self.overlaps), self.label)

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        charts = [{"name": n, "even": list(c.even), "odd": list(c.odd)} for n, c in self.charts.items()]
        trans = []
        for (i, j), F in sorted(self.transitions.items()):
            trans.append({
                "source": i,
                "target": j,
                "overlap": self.overlaps.get((i, j), ""),
                "pullbacks": {name: str(im) for name, im in zip(F.target.coords, F.images)},
            })
        return {"schema": SCHEMA, "label": self.label, "charts": charts, "transitions": trans}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "Atlas":
        if data.get("schema") != SCHEMA:
            raise AtlasError(f"unsupported atlas schema {data.get('schema')!r}")
        charts = {c["name"]: ChartSpec(tuple(c["even"]), tuple(c["odd"])) for c in data["charts"]}
        trans = {}
        overlaps = {}
        for t in data["transitions"]:
            i, j = t["source"], t["target"]
            src, tgt = charts[i], charts[j]
            images = {name: parse_function(text, src) for name, text in t["pullbacks"].items()}
            trans[(i, j)] = ChartMorphism(src, tgt, images)
            if t.get("overlap"):
                overlaps[(i, j)] = t["overlap"]
        return cls(charts, trans, overlaps, data.get("label", ""))

    @classmethod
    def loads(cls, text: str) -> "Atlas":
        return cls.from_json(json.loads(text))


@dataclass
class CocycleReport:
    passed: bool
    checks: list                        # dicts: kind, charts, passed, residual
    failing: tuple | None = None
    residual: str = ""

    def to_json(self):
        return {
            "passed": self.passed,
            "failing": list(self.failing) if self.failing else None,
            "residual": self.residual,
            "checks": self.checks,
        }


def _residual(F: ChartMorphism, G: ChartMorphism) -> dict:
    """Coordinate-wise differences of two morphisms with the same charts."""
    out = {}
    for name, a, b in zip(F.target.coords, F.images, G.images):
        d = a - b
        if d:
            out[name] = str(d)
    return out


def verify_cocycle(A: Atlas) -> CocycleReport:
    checks = []
    failing = None
    first_residual = ""
    names = A.names()
    for i, j in permutations(names, 2):
        if (i, j) not in A.transitions:
            continue
        try:
            back = compose(A.transition(j, i), A.transition(i, j))
            res = _residual(back, identity_morphism(A.charts[i]))
        except (SymbolicError, ChartError) as exc:
            res = {"error": str(exc)}
        ok = not res
        checks.append({"kind": "inverse", "charts": [i, j], "passed": ok, "residual": res})
        if not ok and failing is None:
            failing, first_residual = (i, j), json.dumps(res, sort_keys=True)
    for i, j, k in permutations(names, 3):
        if not all(p in A.transitions for p in ((i, j), (j, k), (i, k))):
            continue
        try:
            res = _residual(compose(A.transition(j, k), A.transition(i, j)), A.transition(i, k))
        except (SymbolicError, ChartError) as exc:
            res = {"error": str(exc)}
        ok = not res
        checks.append({"kind": "triple", "charts": [i, j, k], "passed": ok, "residual": res})
        if not ok and failing is None:
            failing, first_residual = (i, j, k), json.dumps(res, sort_keys=True)
    return CocycleReport(failing is None, checks, failing, first_residual)


# ---------------------------------------------------------------------------
# builders


def projective_chart(m: int, n: int, i: int) -> ChartSpec:
    even = tuple(f"u{k}_{i}" for k in range(m + 1) if k != i)
    odd = tuple(f"xi{l}_{i}" for l in range(1, n + 1))
    return ChartSpec(even, odd)


def build_projective_atlas(m: int, n: int) -> Atlas:
    """m+1 charts U_i of P^{m|n} with pullbacks u^j_k = u^i_k/u^i_j, xi^j_l = xi^i_l/u^i_j."""
    if m < 1 or n < 0:
        raise AtlasError("need m >= 1 and n >= 0")
    if m + 1 > MAX_CHARTS:
        raise AtlasError(f"at most {MAX_CHARTS} charts are supported")
    charts = {str(i): projective_chart(m, n, i) for i in range(m + 1)}
    trans = {}
    overlaps = {}
    for i in range(m + 1):
        src = charts[str(i)]
        uj = lambda j: SuperFunction.coord(src, f"u{j}_{i}")
        for j in range(m + 1):
            if i == j:
                continue
            inv = uj(j).inverse()
            images = {}
            for k in range(m + 1):
                if k == j:
                    continue
                images[f"u{k}_{j}"] = inv if k == i else uj(k) * inv
            for l in range(1, n + 1):
                images[f"xi{l}_{j}"] = SuperFunction.coord(src, f"xi{l}_{i}") * inv
            trans[(str(i), str(j))] = ChartMorphism(src, charts[str(j)], images)
            overlaps[(str(i), str(j))] = f"u{j}_{i} invertible"
    return Atlas(charts, trans, overlaps, f"P^{m}|{n}")


PI_CHART = ChartSpec(("u",), ("xi",))


def build_pi_line_atlas() -> Atlas:
    """Two C^{1|1} charts glued by (u, xi) -> (1/u, -xi/u^2)."""
    psi = ChartMorphism(PI_CHART, PI_CHART, {"u": "1/u", "xi": "-xi/u^2"})
    charts = {"0": PI_CHART, "1": PI_CHART}
    trans = {("0", "1"): psi, ("1", "0"): psi}
    overlaps = {("0", "1"): "u invertible", ("1", "0"): "u invertible"}
    return Atlas(charts, trans, overlaps, "Pi-line")


# ---------------------------------------------------------------------------
# line bundles


@dataclass
class LineBundleCocycle:
    """Transition functions g_ij (in chart i's even coordinate) over a base atlas."""

    base: Atlas
    g: dict                 # (i, j) -> NF
    label: str = ""

    def function(self, i, j) -> Expr:
        return from_nf(self.g[(i, j)]) if i != j else lift(1)

    def verify(self) -> CocycleReport:
        checks = []
        failing = None
        residual = ""
        names = self.base.names()
        for i, j in permutations(names, 2):
            if (i, j) not in self.g or (j, i) not in self.g:
                continue
            prod = self.g[(i, j)] * _pull(self.base, i, j, self.g[(j, i)])
            res = prod - ONE_NF
            ok = res.is_zero()
            checks.append({"kind": "inverse", "charts": [i, j], "passed": ok, "residual": str(from_nf(res))})
            if not ok and failing is None:
                failing, residual = (i, j), str(from_nf(res))
        for i, j, k in permutations(names, 3):
            if not all(p in self.g for p in ((i, j), (j, k), (i, k))):
                continue
            res = _pull(self.base, i, j, self.g[(j, k)]) * self.g[(i, j)] - self.g[(i, k)]
            ok = res.is_zero()
            checks.append({"kind": "triple", "charts": [i, j, k], "passed": ok, "residual": str(from_nf(res))})
            if not ok and failing is None:
                failing, residual = (i, j, k), str(from_nf(res))
        return CocycleReport(failing is None, checks, failing, residual)

    def __eq__(self, other):
        return isinstance(other, LineBundleCocycle) and self.g == other.g

    def to_json(self):
        return {f"{i}->{j}": str(from_nf(v)) for (i, j), v in sorted(self.g.items())}


def _pull(A: Atlas, i, j, c: NF) -> NF:
    """Express a function of chart j's even coordinates in chart i's."""
    F = A.transition(i, j)
    mapping = {name: F.images[k].reduced() for k, name in enumerate(F.target.even)}
    return nf_subs(c, mapping)


def reduced_atlas(A: Atlas) -> Atlas:
    """Drop the odd coordinates and keep the reduced even transitions."""
    charts = {n: ChartSpec(c.even, ()) for n, c in A.charts.items()}
    trans = {}
    for (i, j), F in A.transitions.items():
        images = [SuperFunction(charts[i], {(): F.images[k].reduced()}) for k in range(F.target.m)]
        trans[(i, j)] = ChartMorphism(charts[i], charts[j], images)
    return Atlas(charts, trans, dict(A.overlaps), A.label + " (reduced)" if A.label else "")


def _single_even(A: Atlas):
    for c in A.charts.values():
        if c.m != 1:
            raise AtlasError("expected charts with a single even coordinate")


def canonical_cocycle(A: Atlas) -> LineBundleCocycle:
    """f'_ij = d(reduced phi_ij)/dz_i; the transition functions of K."""
    _single_even(A)
    base = reduced_atlas(A)
    g = {}
    for (i, j), F in base.transitions.items():
        z = base.charts[i].even[0]
        g[(i, j)] = F.images[0].reduced().diff(z)
    return LineBundleCocycle(base, g, "canonical")


def odd_part_cocycle(A: Atlas) -> LineBundleCocycle:
    """g_ij with eta = g_ij(z) zeta on each overlap of a 1|1 atlas."""
    _single_even(A)
    for c in A.charts.values():
        if c.n != 1:
            raise AtlasError("expected 1|1 charts")
    base = reduced_atlas(A)
    g = {}
    for (i, j), F in A.transitions.items():
        eta = F.images[1]
        if set(eta.terms) - {(0,)}:
            raise AtlasError(f"odd transition {i}->{j} is not linear in the odd coordinate")
        g[(i, j)] = eta.coeff_nf((0,))
    return LineBundleCocycle(base, g, "odd part")


def cocycle_product(L1: LineBundleCocycle, L2: LineBundleCocycle) -> LineBundleCocycle:
    return LineBundleCocycle(L1.base, {k: v * L2.g[k] for k, v in L1.g.items()})


def cocycle_square(L: LineBundleCocycle) -> LineBundleCocycle:
    return LineBundleCocycle(L.base, {k: v * v for k, v in L.g.items()}, f"{L.label}^2" if L.label else "")


def _two_chart(L: LineBundleCocycle):
    names = L.base.names()
    if len(names) != 2 or set(L.g) != {(names[0], names[1]), (names[1], names[0])}:
        raise AtlasError("expected a cocycle on a two-chart cover")
    return names


def monomial_data(c: NF, var: str):
    """(coefficient, exponent) when c = coefficient * var^exponent, else None."""
    def single(terms):
        if len(terms) != 1:
            return None
        (m, k), = terms.items()
        if m.exparg is not None:
            return None
        e = 0
        for g, p in m.powers:
            if g.kind == "var" and g.name == var:
                e = p
            else:
                return None
        return k, e

    num, den = single(c.num), single(c.den)
    if num is None or den is None:
        return None
    return num[0] / den[0], num[1] - den[1]


def degree(L: LineBundleCocycle) -> int:
    """Exponent d of g_01 = c*u^d read in the first chart's coordinate.

    With this reading the canonical cocycle -1/u^2 of P^1 has degree -2.
    """
    a, b = _two_chart(L)
    u = L.base.charts[a].even[0]
    data = monomial_data(L.g[(a, b)], u)
    if data is None:
        raise AtlasError("degree is only defined for Laurent-monomial cocycles")
    return data[1]


def cocycle_sqrt(L: LineBundleCocycle):
    """Both square roots of a monomial cocycle, or None for an odd exponent."""
    a, b = _two_chart(L)
    u = L.base.charts[a].even[0]
    data = monomial_data(L.g[(a, b)], u)
    if data is None:
        raise AtlasError("square roots are only supported for Laurent-monomial cocycles")
    c, d = data
    if d % 2:
        return None
    root_c = to_nf(Sqrt(c))
    roots = []
    for sign in (1, -1):
        r_ab = root_c.scale(Scalar(sign)) * (NF.var(u) ** (d // 2))
        r_ba = _pull(L.base, b, a, r_ab).inverse()
        R = LineBundleCocycle(L.base, {(a, b): r_ab, (b, a): r_ba}, f"sqrt{'+' if sign > 0 else '-'}")
        if cocycle_square(R).g != L.g:
            raise AtlasError("square root does not square back on the reverse overlap")
        roots.append(R)
    return tuple(roots)


# ---------------------------------------------------------------------------
# theta characteristics


@dataclass
class ThetaCharacteristic:
    """A cocycle L with L^2 = K exactly on every overlap (the witness alpha is the identity)."""

    L: LineBundleCocycle
    K: LineBundleCocycle
    rescaling: object = 1      # constant lambda relating L to the cocycle it came from

    def residuals(self) -> dict:
        return {f"{i}->{j}": str(from_nf(v * v - self.K.g[(i, j)])) for (i, j), v in sorted(self.L.g.items())}

    def holds(self) -> bool:
        return all(v * v == self.K.g[k] for k, v in self.L.g.items())


@dataclass
class ThetaVerdict:
    exists: bool
    degree_L: int
    degree_square: int
    degree_K: int
    theta: ThetaCharacteristic | None = None
    reason: str = ""

    def to_json(self):
        out = {
            "exists": self.exists,
            "degree_L": self.degree_L,
            "degree_square": self.degree_square,
            "degree_K": self.degree_K,
            "reason": self.reason,
        }
        if self.theta is not None:
            out["theta"] = self.theta.L.to_json()
            out["rescaling"] = str(self.theta.rescaling)
            out["residuals"] = self.theta.residuals()
        return out


def theta_witness(L: LineBundleCocycle, K: LineBundleCocycle) -> ThetaVerdict:
    """Decide whether L (up to constant rescaling of the fibre on one chart) squares to K.

    Both cocycles must be monomials on the same two-chart cover.  Rescaling
    the fibre coordinate of the second chart by lambda multiplies g_01 by
    lambda; a witness exists iff deg L^2 = deg K, and then lambda^2 is the
    ratio of leading constants.
    """
    a, b = _two_chart(L)
    dl, dk = degree(L), degree(K)
    dsq = degree(cocycle_square(L))
    if dsq != dk:
        return ThetaVerdict(False, dl, dsq, dk, reason=f"deg L^2 = {dsq} differs from deg K = {dk}")
    u = L.base.charts[a].even[0]
    cl, _ = monomial_data(L.g[(a, b)], u)
    ck, _ = monomial_data(K.g[(a, b)], u)
    lam = to_nf(Sqrt(ck / (cl * cl)))
    g_ab = L.g[(a, b)] * lam
    g_ba = L.g[(b, a)] * lam.inverse()
    theta_L = LineBundleCocycle(L.base, {(a, b): g_ab, (b, a): g_ba}, "theta")
    theta = ThetaCharacteristic(theta_L, K, from_nf(lam))
    if not theta.holds():
        return ThetaVerdict(False, dl, dsq, dk, reason="rescaled cocycle does not square to K")
    return ThetaVerdict(True, dl, dsq, dk, theta)


def build_supermanifold_from_theta(theta: ThetaCharacteristic, odd_name: str = "xi1") -> Atlas:
    """1|1 atlas with the base's even transitions and odd transitions eta = g_ij zeta."""
    if not theta.holds():
        raise AtlasError("g_ij^2 = f'_ij fails; not a theta characteristic")
    base = theta.L.base
    charts = {n: ChartSpec(c.even, (f"{odd_name}_{n}",)) for n, c in base.charts.items()}
    trans = {}
    for (i, j), F in base.transitions.items():
        src = charts[i]
        even = SuperFunction(src, {(): F.images[0].reduced()})
        odd = SuperFunction.coord(src, src.odd[0]).scale(theta.L.g[(i, j)])
        trans[(i, j)] = ChartMorphism(src, charts[j], [even, odd])
    return Atlas(charts, trans, dict(base.overlaps), "from theta characteristic")


def single_chart_theta(chart_even: str = "z") -> ThetaCharacteristic:
    """The trivial theta characteristic on C (one chart, no overlaps)."""
    base = Atlas({"0": ChartSpec((chart_even,), ())}, {}, {}, "C")
    L = LineBundleCocycle(base, {}, "trivial")
    return ThetaCharacteristic(L, LineBundleCocycle(base, {}, "canonical"))
