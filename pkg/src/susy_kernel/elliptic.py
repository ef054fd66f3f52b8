"""Weierstrass functions for the lattice Z + tau Z and the genus-one embedding.

Lattice sums are taken row by row: for omega = n + m tau the inner sum over
n has a closed form in terms of csc^2 and cot, for instance

    sum_n (w + n)^-2 = pi^2 csc^2(pi w)

so every row is summed exactly and the rows decay like exp(-2 pi |m| Im tau).
The truncation is chosen from an explicit geometric tail bound.  A direct
two-dimensional partial sum (``wp_direct``) and the Laurent expansion at 0
are kept as independent checks.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EllipticError", "EllipticContext", "EmbeddingPoint", "wp", "wp_prime", "invariants",
    "wp1", "wp1_prime", "embed", "verify_affine_ideal", "verify_homogeneous_ideal",
    "wp_direct", "wp_laurent", "sample_points", "fit_reduced_cubic", "parse_tau",
    "invariant_checks", "in_sample_patch", "wp1_branch", "Residuals",
]

PI = math.pi
POLE_DISTANCE = 1e-6
BASE_POINT = (0.25, 0.25)      # z* = 0.25 + 0.25 tau
EXCLUSION = 0.05


class EllipticError(ValueError):
    pass


def parse_tau(text) -> complex:
    """'2i', '1/4+2i', '0.25+2i', 'i' or a complex number."""
    if isinstance(text, (complex, float, int)):
        tau = complex(text)
    else:
        from .susy import Tau
        tau = complex(Tau.parse(str(text).replace(" ", "")))
    if tau.imag <= 0:
        raise EllipticError("tau must have positive imaginary part")
    return tau


# ---------------------------------------------------------------------------
# row sums


def _q(w: complex) -> complex:
    """exp(2 pi i w) with |q| <= 1, using the symmetry w -> -w when Im w < 0."""
    if w.imag >= 0:
        return cmath.exp(2j * PI * w)
    return cmath.exp(-2j * PI * w)


def _csc2(w: complex) -> complex:
    q = _q(w)
    return -4 * q / (1 - q) ** 2


def _cot(w: complex) -> complex:
    if w.imag >= 0:
        q = cmath.exp(2j * PI * w)
        return 1j * (q + 1) / (q - 1)
    q = cmath.exp(-2j * PI * w)
    return -1j * (q + 1) / (q - 1)


def _rows_needed(tau: complex, im_shift: float, tail: float) -> int:
    """Smallest M with sum_{|m| > M} 4 pi^3 |q_m| / (1 - |q_m|)^3 <= tail.

    |q_m| = exp(-2 pi (|m| Im tau - im_shift)) bounds every row beyond M for
    the csc^2, cot csc^2 and Eisenstein rows used here (the pi^3 and cube
    cover the derivative row).
    """
    y = tau.imag
    M = int(math.ceil(im_shift / y)) + 1
    while True:
        r = math.exp(-2 * PI * y)
        q0 = math.exp(-2 * PI * ((M + 1) * y - im_shift))
        if q0 < 0.5:
            bound = 2 * 4 * PI ** 3 * q0 / (1 - q0) ** 3 / (1 - r)
            if bound <= tail:
                return M
        M += 1
        if M > 10_000:
            raise EllipticError("tail bound not reached; Im tau too small")


@dataclass(frozen=True)
class EllipticContext:
    tau: complex
    eps: float = 1e-12               # tail budget per lattice sum
    g2: complex = field(init=False)
    g3: complex = field(init=False)
    e1: complex = field(init=False)
    e2: complex = field(init=False)
    e3: complex = field(init=False)
    rows: int = field(init=False)    # rows used for the Eisenstein sums

    def __post_init__(self):
        tau = parse_tau(self.tau)
        object.__setattr__(self, "tau", tau)
        M = _rows_needed(tau, 0.0, self.eps)
        object.__setattr__(self, "rows", M)
        G4 = PI ** 4 / 45
        G6 = 2 * PI ** 6 / 945
        for m in range(1, M + 1):
            c = _csc2(m * tau)
            G4 += 2 * (PI ** 4 / 3) * c * (3 * c - 2)
            G6 += 2 * PI ** 6 * (c ** 3 - c ** 2 + 2 * c / 15)
        object.__setattr__(self, "g2", 60 * G4)
        object.__setattr__(self, "g3", 140 * G6)
        for name, w in (("e1", 0.5), ("e2", tau / 2), ("e3", (1 + tau) / 2)):
            object.__setattr__(self, name, wp(w, self))

    @property
    def half_periods(self):
        return (0.5, self.tau / 2, (1 + self.tau) / 2)

    def lattice_distance(self, z: complex) -> float:
        b = z.imag / self.tau.imag
        best = math.inf
        for m in (math.floor(b), math.floor(b) + 1):
            w = z - m * self.tau
            for n in (math.floor(w.real), math.floor(w.real) + 1):
                best = min(best, abs(w - n))
        return best

    def to_json(self):
        c = lambda x: [x.real, x.imag]
        return {"tau": c(self.tau), "rows": self.rows, "g2": c(self.g2), "g3": c(self.g3),
                "e1": c(self.e1), "e2": c(self.e2), "e3": c(self.e3)}


def _check_pole(z: complex, ctx: EllipticContext):
    if ctx.lattice_distance(z) <= POLE_DISTANCE:
        raise EllipticError(f"z = {z} is within {POLE_DISTANCE} of a lattice point")


def wp(z: complex, ctx: EllipticContext) -> complex:
    z = complex(z)
    _check_pole(z, ctx)
    M = _rows_needed(ctx.tau, abs(z.imag), ctx.eps)
    s = PI ** 2 * _csc2(z)
    for m in range(1, M + 1):
        s += PI ** 2 * (_csc2(z + m * ctx.tau) + _csc2(z - m * ctx.tau))
    # minus the Eisenstein-ordered sum of omega^-2, which is G2
    G2 = PI ** 2 / 3
    for m in range(1, ctx.rows + 1):
        G2 += 2 * PI ** 2 * _csc2(m * ctx.tau)
    return s - G2


def wp_prime(z: complex, ctx: EllipticContext) -> complex:
    z = complex(z)
    _check_pole(z, ctx)
    M = _rows_needed(ctx.tau, abs(z.imag), ctx.eps)

    def row(w):
        return PI ** 3 * _cot(w) * _csc2(w)

    s = row(z)
    for m in range(1, M + 1):
        s += row(z + m * ctx.tau) + row(z - m * ctx.tau)
    return -2 * s


def invariants(ctx: EllipticContext):
    return ctx.g2, ctx.g3, ctx.e1, ctx.e2, ctx.e3


def wp_direct(z: complex, tau: complex, R: float) -> complex:
    """Plain partial sum 1/z^2 + sum' over |omega| <= R (slow; an oracle only)."""
    s = 1 / z ** 2
    mmax = int(R / tau.imag) + 1
    for m in range(-mmax, mmax + 1):
        for n in range(-int(R) - int(abs(tau.real) * mmax) - 2, int(R) + int(abs(tau.real) * mmax) + 3):
            if m == 0 and n == 0:
                continue
            w = n + m * tau
            if abs(w) > R:
                continue
            s += 1 / (z - w) ** 2 - 1 / w ** 2
    return s


def wp_direct_tail_bound(z: complex, R: float) -> float:
    """Bound for the omitted terms: |(z-w)^-2 - w^-2| <= 3|z|/|w|^3 * 4 for |w| >= 2|z|,
    and sum_{|w| > R} |w|^-3 <= 2 pi / (c (R - 2)) with c the cell area; used loosely."""
    return 40 * abs(z) / max(R - 2, 1.0)


def wp_laurent(z: complex, ctx: EllipticContext) -> complex:
    """1/z^2 + g2 z^2/20 + g3 z^4/28, accurate to O(z^6) near 0."""
    return 1 / z ** 2 + ctx.g2 * z ** 2 / 20 + ctx.g3 * z ** 4 / 28


# ---------------------------------------------------------------------------
# the square root of wp - e1


def _cell(z: complex, tau: complex):
    """(a, b) with z = a + b tau."""
    b = z.imag / tau.imag
    return z.real - b * tau.real, b


def in_sample_patch(z: complex, ctx: EllipticContext) -> bool:
    """Inside the open cell {a + b tau : 0 < a, b < 1}, away from lattice points and half periods."""
    a, b = _cell(z, ctx.tau)
    if not (0 < a < 1 and 0 < b < 1):
        return False
    special = [0, 1, ctx.tau, 1 + ctx.tau, *ctx.half_periods, 0.5 + ctx.tau, 1 + ctx.tau / 2]
    return all(abs(z - p) > EXCLUSION for p in special)


def base_point(ctx: EllipticContext) -> complex:
    return BASE_POINT[0] + BASE_POINT[1] * ctx.tau


@dataclass
class Branch:
    value: complex
    path: list          # points visited, base point first
    steps: int


def wp1_branch(z: complex, ctx: EllipticContext, steps: int = 64) -> Branch:
    """Continue sqrt(wp - e1) from the principal root at z* along the segment to z.

    At each step the sign is chosen closest to the first-order prediction
    v + v' dz with v' = wp'/(2 v); a step is halved when the choice is not
    clear-cut.
    """
    z = complex(z)
    z0 = base_point(ctx)
    v = cmath.sqrt(wp(z0, ctx) - ctx.e1)
    path = [z0]
    t, total = 0.0, 1.0
    dt = 1.0 / steps
    taken = 0
    while t < total - 1e-15:
        h = min(dt, total - t)
        zc = z0 + t * (z - z0)
        zn = z0 + (t + h) * (z - z0)
        d = wp_prime(zc, ctx) / (2 * v)
        pred = v + d * (zn - zc)
        cand = cmath.sqrt(wp(zn, ctx) - ctx.e1)
        a, b = abs(cand - pred), abs(-cand - pred)
        if min(a, b) > 0.25 * max(a, b) and h > 1e-6:
            dt = h / 2
            continue
        v = cand if a <= b else -cand
        t += h
        path.append(zn)
        taken += 1
    if abs(v) < 1e-12:
        raise EllipticError("z is a zero of wp - e1 (branch point)")
    return Branch(v, path, taken)


def wp1(z: complex, ctx: EllipticContext, steps: int = 64) -> complex:
    return wp1_branch(z, ctx, steps).value


def wp1_prime(z: complex, ctx: EllipticContext, steps: int = 64) -> complex:
    return wp_prime(z, ctx) / (2 * wp1(z, ctx, steps))


# ---------------------------------------------------------------------------
# embedding and ideal residuals


@dataclass(frozen=True)
class EmbeddingPoint:
    """[x0, x1, x2 | xi1, xi2, xi3], the odd entries being the coefficients of zeta."""

    x: tuple
    xi: tuple

    def __post_init__(self):
        if not any(self.x):
            raise EllipticError("all even coordinates vanish")

    def scaled(self, lam: complex) -> "EmbeddingPoint":
        return EmbeddingPoint(tuple(lam * c for c in self.x), tuple(lam * c for c in self.xi))

    def to_json(self):
        c = lambda v: [v.real, v.imag]
        return {"x": [c(v) for v in self.x], "xi": [c(v) for v in self.xi]}


def embed(z: complex, ctx: EllipticContext) -> EmbeddingPoint:
    p = wp(z, ctx)
    dp = wp_prime(z, ctx)
    q = wp1(z, ctx)
    dq = dp / (2 * q)
    return EmbeddingPoint((p, dp, 1.0 + 0j), (q, dq, q * p))


def _rel(res: complex, *terms: complex) -> float:
    """|res| relative to the size of the largest term (absolute when terms are small)."""
    scale = max([1.0] + [abs(t) for t in terms])
    return abs(res) / scale


AFFINE_NAMES = ("cubic", "2(x-e1)eta2 = y eta1", "y eta2 = 2(x-e2)(x-e3)eta1", "eta3 = x eta1")
HOMOGENEOUS_NAMES = ("x1^2 x2 = 4x0^3 - g2 x0 x2^2 - g3 x2^3", "2(x0x2 - e1x2^2)xi2 = x1x2xi1",
                     "x1x2xi2 = 2(x0 - e2x2)(x0 - e3x2)xi1", "xi3x2 = x0xi1")
HOMOGENEOUS_DEGREES = (3, 3, 3, 2)


@dataclass
class Residuals:
    names: tuple
    absolute: list
    relative: list

    def max(self) -> float:
        return max(self.relative)

    def to_json(self):
        return [{"equation": n, "absolute": a, "relative": r}
                for n, a, r in zip(self.names, self.absolute, self.relative)]


def verify_affine_ideal(z: complex, ctx: EllipticContext, e1: complex | None = None) -> Residuals:
    """Residuals of the four affine equations at embed(z).  ``e1`` overrides the stored value."""
    P = embed(z, ctx)
    x, y = P.x[0], P.x[1]
    h1, h2, h3 = P.xi
    e1 = ctx.e1 if e1 is None else e1
    g2, g3, e2, e3 = ctx.g2, ctx.g3, ctx.e2, ctx.e3
    t = [
        (y * y, 4 * x ** 3, g2 * x, g3),
        (2 * (x - e1) * h2, y * h1),
        (y * h2, 2 * (x - e2) * (x - e3) * h1),
        (h3, x * h1),
    ]
    res = [
        t[0][0] - (t[0][1] - t[0][2] - t[0][3]),
        t[1][0] - t[1][1],
        t[2][0] - t[2][1],
        t[3][0] - t[3][1],
    ]
    return Residuals(AFFINE_NAMES, [abs(r) for r in res], [_rel(r, *tt) for r, tt in zip(res, t)])


def homogeneous_residuals(P: EmbeddingPoint, ctx: EllipticContext):
    x0, x1, x2 = P.x
    s1, s2, s3 = P.xi
    g2, g3, e1, e2, e3 = ctx.g2, ctx.g3, ctx.e1, ctx.e2, ctx.e3
    t = [
        (x1 * x1 * x2, 4 * x0 ** 3, g2 * x0 * x2 * x2, g3 * x2 ** 3),
        (2 * (x0 * x2 - e1 * x2 * x2) * s2, x1 * x2 * s1),
        (x1 * x2 * s2, 2 * (x0 - e2 * x2) * (x0 - e3 * x2) * s1),
        (s3 * x2, x0 * s1),
    ]
    res = [
        t[0][0] - (t[0][1] - t[0][2] - t[0][3]),
        t[1][0] - t[1][1],
        t[2][0] - t[2][1],
        t[3][0] - t[3][1],
    ]
    return res, t


def verify_homogeneous_ideal(P: EmbeddingPoint, ctx: EllipticContext, lam: complex | None = None) -> Residuals:
    """Residuals of the homogeneous equations at P (or at lam*P, divided by lam^degree)."""
    Q = P if lam is None else P.scaled(lam)
    res, t = homogeneous_residuals(Q, ctx)
    if lam is not None:
        res = [r / lam ** d for r, d in zip(res, HOMOGENEOUS_DEGREES)]
        t = [tuple(x / lam ** d for x in tt) for tt, d in zip(t, HOMOGENEOUS_DEGREES)]
    return Residuals(HOMOGENEOUS_NAMES, [abs(r) for r in res], [_rel(r, *tt) for r, tt in zip(res, t)])


def sample_points(ctx: EllipticContext, count: int, seed: int = 0):
    """Deterministic points of the sample patch."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b = rng.uniform(0.0, 1.0, 2)
        z = complex(a + b * ctx.tau)
        if in_sample_patch(z, ctx):
            out.append(z)
    return out


def fit_reduced_cubic(ctx: EllipticContext, points):
    """Least-squares a1, a2 for y^2 = 4x^3 - a1 x^2 - a2 (reported, never asserted)."""
    xs = np.array([wp(z, ctx) for z in points])
    ys = np.array([wp_prime(z, ctx) for z in points])
    A = np.column_stack([-xs ** 2, -np.ones_like(xs)])
    rhs = ys ** 2 - 4 * xs ** 3
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    a1, a2 = sol
    resid = np.abs(A @ sol - rhs) / np.maximum(1.0, np.abs(ys ** 2))
    return complex(a1), complex(a2), float(resid.max())


def invariant_checks(ctx: EllipticContext, points) -> dict:
    """Residuals of the invariant identities (absolute, relative to max(1, scale))."""
    e1, e2, e3, g2, g3 = ctx.e1, ctx.e2, ctx.e3, ctx.g2, ctx.g3
    out = {
        "e1+e2+e3": _rel(e1 + e2 + e3, e1, e2, e3),
        "e1e2+e2e3+e3e1+g2/4": _rel(e1 * e2 + e2 * e3 + e3 * e1 + g2 / 4, e1 * e2, e2 * e3, e3 * e1, g2 / 4),
        "e1e2e3-g3/4": _rel(e1 * e2 * e3 - g3 / 4, e1 * e2 * e3, g3 / 4),
    }
    worst = 0.0
    for z in points:
        x = wp(z, ctx)
        a = 4 * (x - e1) * (x - e2) * (x - e3)
        b = 4 * x ** 3 - g2 * x - g3
        worst = max(worst, _rel(a - b, a, b))
    out["4(x-e1)(x-e2)(x-e3) - cubic"] = worst
    worst = 0.0
    for w in ctx.half_periods:
        worst = max(worst, abs(wp_prime(w, ctx)) / max(1.0, abs(ctx.g2) ** 0.75))
    out["wp'(half periods)"] = worst
    return out
