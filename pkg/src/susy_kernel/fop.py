"""Points of P^{m|n} and of the Pi-line with values in Grassmann test rings.

Vectors of Lambda_N^{2|2} are written in the basis order (e0, E0, e1, E1)
at this module's boundary, so e = (s0, sigma0, s1, sigma1) and
E = (sigma0, s0, sigma1, s1).  The grassmann helpers use (e0, e1, E0, E1);
``to_even_first``/``from_even_first`` convert.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from .atlas import build_pi_line_atlas, build_projective_atlas
from .grassmann import (DNumber, GrassmannAlgebra, GrassmannElement, SuperMatrix,
                        d_to_gl11, ginv, phi_apply, right_theta_action, vector_parity)
from .superfn import apply_morphism_to_point

__all__ = [
    "FopError", "ProjPointData", "PiPointData", "proj_standard_form", "affine_to_proj",
    "proj_chart_change", "pi_standard_form", "pi_standard_form_by_rescaling",
    "pi_rescale", "pi_gluing_check", "phi_invariance_check", "theta_stability_check",
    "span_coefficients", "random_proj_point", "random_pi_point", "to_even_first",
    "from_even_first",
]


class FopError(ValueError):
    pass


def to_even_first(v):
    """(e0, E0, e1, E1) -> (e0, e1, E0, E1)."""
    a, b, c, d = v
    return (a, c, b, d)


def from_even_first(v):
    a, c, b, d = v
    return (a, b, c, d)


# ---------------------------------------------------------------------------
# projective space


@dataclass(frozen=True)
class ProjPointData:
    alg: GrassmannAlgebra
    t: tuple          # m+1 even elements
    theta: tuple      # n odd elements
    i: int            # slot with invertible t_i

    def __post_init__(self):
        for x in self.t:
            if not x.is_even():
                raise FopError("homogeneous coordinates t_k must be even")
        for x in self.theta:
            if not x.is_odd():
                raise FopError("homogeneous coordinates theta_l must be odd")
        if not 0 <= self.i < len(self.t):
            raise FopError("distinguished index out of range")

    @property
    def m(self):
        return len(self.t) - 1

    @property
    def n(self):
        return len(self.theta)

    def rescale(self, lam: GrassmannElement) -> "ProjPointData":
        if not lam.is_even() or not lam.is_invertible():
            raise FopError("rescaling needs an even unit")
        return ProjPointData(self.alg, tuple(x * lam for x in self.t), tuple(x * lam for x in self.theta), self.i)

    def to_json(self):
        return {"n": self.alg.n, "i": self.i, "t": [x.to_json() for x in self.t],
                "theta": [x.to_json() for x in self.theta]}


def proj_standard_form(p: ProjPointData, i: int | None = None):
    """(t_k / t_i for k != i, theta_l / t_i) with exact inversion."""
    i = p.i if i is None else i
    ti = p.t[i]
    if not ti.is_invertible():
        raise FopError(f"t_{i} is not invertible (zero body)")
    inv = ginv(ti)
    even = tuple(x * inv for k, x in enumerate(p.t) if k != i)
    odd = tuple(x * inv for x in p.theta)
    return even, odd


def affine_to_proj(i: int, coords, alg: GrassmannAlgebra | None = None) -> ProjPointData:
    """Insert 1 at slot i of the affine coordinates (even tuple, odd tuple)."""
    even, odd = coords
    even, odd = tuple(even), tuple(odd)
    if alg is None:
        alg = (even + odd)[0].alg
    if not 0 <= i <= len(even):
        raise FopError("slot out of range")
    t = even[:i] + (alg.one(),) + even[i:]
    return ProjPointData(alg, t, odd, i)


def proj_chart_change(i: int, j: int, coords, m: int, n: int):
    """Apply the atlas transition i -> j to affine coordinates of chart i."""
    A = _proj_atlas(m, n)
    F = A.transition(str(i), str(j))
    even, odd = coords
    point = dict(zip(F.source.even, even))
    point.update(zip(F.source.odd, odd))
    alg = (tuple(even) + tuple(odd))[0].alg
    img = apply_morphism_to_point(F, point, alg)
    return tuple(img[c] for c in F.target.even), tuple(img[c] for c in F.target.odd)


@lru_cache(maxsize=None)
def _proj_atlas(m, n):
    return build_projective_atlas(m, n)


def random_proj_point(alg: GrassmannAlgebra, m: int, n: int, rng: random.Random) -> ProjPointData:
    i = rng.randrange(m + 1)
    t = tuple(alg.random(rng, parity=0, invertible=(k == i)) for k in range(m + 1))
    theta = tuple(alg.random(rng, parity=1) for _ in range(n))
    return ProjPointData(alg, t, theta, i)


# ---------------------------------------------------------------------------
# the Pi-line


@dataclass(frozen=True)
class PiPointData:
    alg: GrassmannAlgebra
    s0: GrassmannElement
    sigma0: GrassmannElement
    s1: GrassmannElement
    sigma1: GrassmannElement

    def __post_init__(self):
        if not (self.s0.is_even() and self.s1.is_even()):
            raise FopError("s0, s1 must be even")
        if not (self.sigma0.is_odd() and self.sigma1.is_odd()):
            raise FopError("sigma0, sigma1 must be odd")

    def e(self):
        return (self.s0, self.sigma0, self.s1, self.sigma1)

    def E(self):
        return (self.sigma0, self.s0, self.sigma1, self.s1)

    def chart(self) -> int:
        """Lowest index with an invertible s."""
        if self.s0.is_invertible():
            return 0
        if self.s1.is_invertible():
            return 1
        raise FopError("neither s0 nor s1 is invertible; rank is not 1|1")

    def to_json(self):
        return {"n": self.alg.n, "e": [x.to_json() for x in self.e()]}


def pi_standard_form(p: PiPointData, chart: int | None = None):
    """(v, nu) in chart 0 or 1.

    chart 0: v0 = s1 s0^-1 - sigma1 sigma0 s0^-2,  nu0 = sigma1 s0^-1 - s1 sigma0 s0^-2
    chart 1: v1 = s0 s1^-1 - sigma0 sigma1 s1^-2,  nu1 = sigma0 s1^-1 - s0 sigma1 s1^-2
    """
    chart = p.chart() if chart is None else chart
    if chart == 0:
        s, sig, t, tau = p.s0, p.sigma0, p.s1, p.sigma1
    elif chart == 1:
        s, sig, t, tau = p.s1, p.sigma1, p.s0, p.sigma0
    else:
        raise FopError("chart must be 0 or 1")
    if not s.is_invertible():
        raise FopError(f"s{chart} is not invertible")
    inv = ginv(s)
    inv2 = inv * inv
    v = t * inv - tau * sig * inv2
    nu = tau * inv - t * sig * inv2
    return v, nu


def _g_matrix(s, sig):
    """[[s^-1, -sig s^-2], [-sig s^-2, s^-1]]."""
    inv = ginv(s)
    off = -(sig * inv * inv)
    return [[inv, off], [off, inv]]


def pi_standard_form_by_rescaling(p: PiPointData, chart: int | None = None):
    """Second route: right-multiply the columns (e | E) by g_chart and read off the entries."""
    chart = p.chart() if chart is None else chart
    cols = [p.e(), p.E()]
    if chart == 0:
        g = _g_matrix(p.s0, p.sigma0)
        rows = (2, 3)
        unit_rows = (0, 1)
    else:
        g = _g_matrix(p.s1, p.sigma1)
        rows = (0, 1)
        unit_rows = (2, 3)
    alg = p.alg
    M = [[cols[0][r], cols[1][r]] for r in range(4)]
    out = [[M[r][0] * g[0][c] + M[r][1] * g[1][c] for c in range(2)] for r in range(4)]
    # the pivot rows must come out as the identity block
    if out[unit_rows[0]] != [alg.one(), alg.zero()] or out[unit_rows[1]] != [alg.zero(), alg.one()]:
        raise FopError("rescaled basis is not in standard form")
    return out[rows[0]][0], out[rows[0]][1]


def pi_rescale(p: PiPointData, d: DNumber) -> PiPointData:
    """Right multiplication of the columns (e | E) by the GL(1|1) image of a D-number."""
    g = d_to_gl11(d)
    a, alpha = g[0, 0], g[0, 1]
    e, E = p.e(), p.E()
    new = [e[k] * a + E[k] * alpha for k in range(4)]
    return PiPointData(p.alg, *new)


def random_pi_point(alg: GrassmannAlgebra, rng: random.Random, chart: int | None = None) -> PiPointData:
    chart = rng.randrange(2) if chart is None else chart
    s = [alg.random(rng, parity=0, invertible=(k == chart)) for k in range(2)]
    sig = [alg.random(rng, parity=1) for _ in range(2)]
    return PiPointData(alg, s[0], sig[0], s[1], sig[1])


@dataclass
class GluingResult:
    passed: bool
    chart1_form: tuple
    expected: tuple
    atlas_image: tuple

    def to_json(self):
        return {"verdict": "pass" if self.passed else "fail",
                "chart1": [str(x) for x in self.chart1_form],
                "expected": [str(x) for x in self.expected],
                "atlas": [str(x) for x in self.atlas_image]}


def pi_gluing_check(v0: GrassmannElement, nu0: GrassmannElement) -> GluingResult:
    """(1, 0, v0, nu0) read in chart 1 against (1/v0, -nu0/v0^2) and the Pi-line atlas map."""
    if not v0.is_invertible():
        raise FopError("v0 is not invertible")
    alg = v0.alg
    p = PiPointData(alg, alg.one(), alg.zero(), v0, nu0)
    got = pi_standard_form(p, 1)
    inv = ginv(v0)
    expected = (inv, -(nu0 * inv * inv))
    A = build_pi_line_atlas()
    img = apply_morphism_to_point(A.transition("0", "1"), {"u": v0, "xi": nu0}, alg)
    atlas = (img["u"], img["xi"])
    return GluingResult(got == expected and atlas == expected, got, expected, atlas)


# ---------------------------------------------------------------------------
# spans of rank 1|1


def span_coefficients(rows, v):
    """(c1, c2) with v = r1 c1 + r2 c2, or None when v is not in the span.

    rows = (r1 even, r2 odd) in (e0, E0, e1, E1) order.  Pivots are taken
    on unit-body entries only: r1 in an e-slot, r2 in an E-slot.
    """
    r1, r2 = rows
    even_slots, odd_slots = (0, 2), (1, 3)
    p = next((k for k in even_slots if r1[k].is_invertible()), None)
    q = next((k for k in odd_slots if r2[k].is_invertible()), None)
    if p is None or q is None:
        raise FopError("rows are rank deficient: no unit pivot")
    M = SuperMatrix([[r1[p], r2[p]], [r1[q], r2[q]]], 1, 1, 0)
    Minv = M.inverse()
    c1 = Minv[0, 0] * v[p] + Minv[0, 1] * v[q]
    c2 = Minv[1, 0] * v[p] + Minv[1, 1] * v[q]
    for k in range(4):
        if r1[k] * c1 + r2[k] * c2 != v[k]:
            return None
    return c1, c2


def _check_rows(rows):
    r1, r2 = (tuple(r) for r in rows)
    if vector_parity(to_even_first(r1)) != 0 or vector_parity(to_even_first(r2)) != 1:
        raise FopError("rows must be homogeneous: the first even, the second odd")
    return r1, r2


def phi_invariance_check(rows) -> bool:
    """phi(r) lies in span(rows) for both rows."""
    r1, r2 = _check_rows(rows)
    for r in (r1, r2):
        image = from_even_first(phi_apply(to_even_first(r)))
        if span_coefficients((r1, r2), image) is None:
            return False
    return True


def theta_stability_check(rows) -> bool:
    """r . theta lies in span(rows) for both rows (right D-module view)."""
    r1, r2 = _check_rows(rows)
    for r in (r1, r2):
        image = from_even_first(right_theta_action(to_even_first(r)))
        if span_coefficients((r1, r2), image) is None:
            return False
    return True
