"""Acceptance suite: one test per criterion, each printed as a PASS/FAIL line.

Run with pytest (the lines appear in the terminal summary) or directly:
    python3 tests/test_acceptance.py
"""

import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from _gen import CHART_12, rand_coefficient, rand_field, rand_poly, rand_scalar, rand_superfunction  # noqa: E402

from susy_kernel.atlas import (build_pi_line_atlas, build_projective_atlas, canonical_cocycle,
                               degree, odd_part_cocycle, theta_witness)
from susy_kernel.cli import random_rows, run
from susy_kernel.elliptic import (EllipticContext, embed, invariant_checks, parse_tau,
                                  sample_points, verify_affine_ideal, verify_homogeneous_ideal)
from susy_kernel.fop import (PiPointData, affine_to_proj, phi_invariance_check,
                             pi_gluing_check, pi_rescale, pi_standard_form,
                             pi_standard_form_by_rescaling, proj_standard_form,
                             random_pi_point, random_proj_point, theta_stability_check)
from susy_kernel.grassmann import (DNumber, GrassmannAlgebra, PHI2, d_to_gl11, dinv, dmul,
                                   normalize_psi, psi_matrix)
from susy_kernel.superfn import (SuperFunction, SuperOneForm, SuperVectorField, bracket,
                                 compose, identity_morphism, parse_vector_field, pullback_form)
from susy_kernel.susy import (STD_CHART, SusyAutomorphismCandidate, Tau, canonical_coordinates,
                              commute, d_squared, elliptic_action_generators, in_fundamental_domain,
                              is_susy_automorphism, mobius, reduce_to_fundamental_domain,
                              susy_omega, transformed_field)
from susy_kernel.symcore import Scalar, antiderivative, from_nf, sym
from susy_kernel.symcore.normal import NF, to_nf

# pinned tolerances and budgets
PROJECTIVE_BUDGET_S = 10.0
ELLIPTIC_BUDGET_S = 30.0
ELLIPTIC_EPS = 1e-8
FD_EPS = 1e-12
ELLIPTIC_TAUS = ("i", "2i", "1/4 + 2i")
ELLIPTIC_SAMPLES = 20

TITLES = {
    1: "projective cocycles exact, under 10 s",
    2: "Pi-line transition is an involution",
    3: "bracket identities and the D^2 formula",
    4: "canonical coordinates straighten D",
    5: "pullback law for the SUSY form",
    6: "automorphism classification and lattice generators",
    7: "genus-0 theta dichotomy",
    8: "functor-of-points round trips",
    9: "odd involution normalizes to the standard one",
    10: "D-number group and its GL(1|1) embedding",
    11: "elliptic invariants and ideal residuals",
    12: "fundamental-domain reduction",
}

C = STD_CHART


def sign(p, q):
    return -1 if p & q else 1


def frame(f: NF, g: NF) -> SuperVectorField:
    return SuperVectorField(C, [SuperFunction(C, {(0,): g}), SuperFunction(C, {(): f})])


# --- 1 --------------------------------------------------------------------

def test_criterion_01():
    start = time.perf_counter()
    for m, n in [(1, 0), (1, 1), (2, 3), (3, 2)]:
        code, rep = run(["atlas", "verify", "--proj", str(m), str(n)])
        assert code == 0, (m, n)
        for c in rep.checks:
            assert c["verdict"] == "pass"
            assert c.get("residual", {}) == {}, (m, n, c)
    assert time.perf_counter() - start < PROJECTIVE_BUDGET_S


# --- 2 --------------------------------------------------------------------

def test_criterion_02():
    psi = build_pi_line_atlas().transition("0", "1")
    assert compose(psi, psi) == identity_morphism(psi.source)


# --- 3 --------------------------------------------------------------------

def rand_rational_unit(rng):
    c = NF.const(rand_scalar(rng, nonzero=True))
    return c * NF.var("z") ** rng.choice([-3, -2, -1, 0, 1, 2, 3])


def test_criterion_03():
    for seed in range(50):
        rng = random.Random(seed)
        p, q, r = (rng.randrange(2) for _ in range(3))
        X, Y, Z = (rand_field(rng, CHART_12, k) for k in (p, q, r))
        assert bracket(X, Y) == -sign(p, q) * bracket(Y, X)
        assert bracket(X, bracket(Y, Z)) == bracket(bracket(X, Y), Z) + sign(p, q) * bracket(Y, bracket(X, Z))
        a = rng.randrange(2)
        f = rand_superfunction(rng, CHART_12, a, sparse=0.9)
        g = rand_superfunction(rng, CHART_12, rng.randrange(2), sparse=0.9)
        assert X(f * g) == X(f) * g + sign(p, a) * (f * X(g))
    for seed in range(50):
        rng = random.Random(1000 + seed)
        f, g = rand_rational_unit(rng), rand_rational_unit(rng)
        expected = SuperVectorField(C, [SuperFunction(C, {(): f * g}),
                                        SuperFunction(C, {(0,): g * f.diff("z")})])
        assert d_squared(frame(f, g)) == expected


# --- 4 --------------------------------------------------------------------

def rand_frame_unit(rng):
    c = NF.const(rand_scalar(rng, nonzero=True))
    kind = rng.randrange(3)
    if kind == 0:
        return c
    if kind == 1:
        a = rng.choice([-2, -1, 1, 2, Fraction(1, 2), Fraction(-1, 3)])
        return c * to_nf(sym(f"exp({a}*z)", "z"))
    return c * NF.var("z") ** rng.choice([-2, -1, 1, 2])


def test_criterion_04():
    target = None
    for seed in range(50):
        rng = random.Random(seed)
        D = frame(rand_frame_unit(rng), rand_frame_unit(rng))
        cc = canonical_coordinates(D, invertible=("z",))
        assert cc.exact
        target = cc.morphism.target
        assert transformed_field(cc, D) == parse_vector_field("d/deta + eta*d/dw", target)
    cc = canonical_coordinates(parse_vector_field("d/dzeta + exp(z)*zeta*d/dz", C))
    assert to_nf(cc.w) == to_nf(sym("-exp(-z)", "z"))
    assert not cc.global_injective


# --- 5 --------------------------------------------------------------------

def test_criterion_05():
    for seed in range(50):
        rng = random.Random(seed)
        f, g = rand_coefficient(rng), rand_coefficient(rng)
        F = SusyAutomorphismCandidate(from_nf(f), from_nf(g)).morphism()
        expected = SuperOneForm(C, [SuperFunction(C, {(): f.diff("z")}),
                                    SuperFunction(C, {(0,): -(g * g)})])
        assert pullback_form(F, susy_omega()) == expected


# --- 6 --------------------------------------------------------------------

def affine_with_square_root(f: NF, g: NF) -> bool:
    fp = f.diff("z")
    return (fp.diff("z").is_zero() and not fp.is_zero()
            and g.diff("z").is_zero() and g * g == fp)


def candidate(rng):
    kind = rng.randrange(4)
    if kind == 0:
        r = rand_scalar(rng, nonzero=True)
        f = to_nf(sym(f"{r * r}*z + {rand_scalar(rng)}", "z"))
        return f, NF.const(r * rng.choice([1, -1]))
    if kind == 1:
        g = rand_poly(rng, "z", rng.randint(1, 2))
        return to_nf(antiderivative(from_nf(g * g), "z")) + NF.const(rand_scalar(rng)), g
    if kind == 2:
        r = rand_scalar(rng, nonzero=True)
        return to_nf(sym(f"{r * r + Scalar(1)}*z", "z")), NF.const(r)
    return rand_poly(rng, "z", rng.randint(0, 5)), rand_poly(rng, "z", rng.randint(0, 5))


def test_criterion_06():
    seen = set()
    for seed in range(200):
        rng = random.Random(seed)
        f, g = candidate(rng)
        v = is_susy_automorphism(SusyAutomorphismCandidate(from_nf(f), from_nf(g)))
        want = affine_with_square_root(f, g)
        assert v.ok == want, (from_nf(f), from_nf(g))
        seen.add(want)
    assert seen == {True, False}
    for tau in ELLIPTIC_TAUS:
        gens = []
        for s in (1, -1):
            gens += list(elliptic_action_generators(Tau.parse(tau), s, s))
        for G in gens:
            v = is_susy_automorphism(G)
            assert v.ok and to_nf(v.t) == NF.const(Scalar(1))
        assert all(commute(G, H) for G in gens for H in gens)


# --- 7 --------------------------------------------------------------------

def test_criterion_07():
    A = build_projective_atlas(1, 1)
    L = odd_part_cocycle(A)
    assert degree(L) == -1
    v = theta_witness(L, canonical_cocycle(A))
    assert v.exists and v.theta.holds()
    u = NF.var("u1_0")
    assert v.theta.L.g[("0", "1")] in (NF.const(Scalar(0, 1)) / u, NF.const(Scalar(0, -1)) / u)

    P = build_pi_line_atlas()
    w = theta_witness(odd_part_cocycle(P), canonical_cocycle(P))
    assert (w.degree_L, w.degree_square, w.degree_K) == (-2, -4, -2)
    assert not w.exists


# --- 8 --------------------------------------------------------------------

def test_criterion_08():
    for seed in range(200):
        rng = random.Random(seed)
        alg = GrassmannAlgebra(rng.randint(0, 3))
        p = random_proj_point(alg, *rng.choice([(1, 0), (1, 1), (2, 3), (3, 2)]), rng)
        coords = proj_standard_form(p)
        assert proj_standard_form(affine_to_proj(p.i, coords, alg)) == coords
        lam = alg.random(rng, parity=0, invertible=True)
        assert proj_standard_form(p.rescale(lam)) == coords

        q = random_pi_point(alg, rng)
        c = q.chart()
        v, nu = pi_standard_form(q, c)
        assert pi_standard_form_by_rescaling(q, c) == (v, nu)
        base = PiPointData(alg, alg.one(), alg.zero(), v, nu) if c == 0 else PiPointData(alg, v, nu, alg.one(), alg.zero())
        assert pi_standard_form(base, c) == (v, nu)
        d = DNumber(alg.random(rng, parity=0, invertible=True), alg.random(rng, parity=1))
        assert pi_standard_form(pi_rescale(q, d), c) == (v, nu)

        v0 = alg.random(rng, parity=0, invertible=True)
        assert pi_gluing_check(v0, alg.random(rng, parity=1)).passed
    for seed in range(500):
        rng = random.Random(seed)
        alg = GrassmannAlgebra(rng.randint(1, 3))
        stable = seed % 2 == 0
        rows = random_rows(alg, rng, stable)
        phi, theta = phi_invariance_check(rows), theta_stability_check(rows)
        assert phi == theta
        if stable:
            assert phi


# --- 9 --------------------------------------------------------------------

def test_criterion_09():
    alg = GrassmannAlgebra(3)
    for seed in range(200):
        rng = random.Random(seed)
        psi = psi_matrix(alg.random(rng, parity=0, invertible=True), alg.random(rng, parity=1))
        P = normalize_psi(psi)
        assert P @ psi @ P.inverse() == PHI2(alg)


# --- 10 -------------------------------------------------------------------

def test_criterion_10():
    alg = GrassmannAlgebra(3)
    one = DNumber(alg.one())
    for seed in range(100):
        rng = random.Random(seed)
        x, y, z = (DNumber(alg.random(rng, parity=0, invertible=True), alg.random(rng, parity=1))
                   for _ in range(3))
        assert dmul(dmul(x, y), z) == dmul(x, dmul(y, z))
        assert dmul(x, one) == x == dmul(one, x)
        assert dmul(x, dinv(x)) == one == dmul(dinv(x), x)
        assert d_to_gl11(dmul(x, y)) == d_to_gl11(x) @ d_to_gl11(y)
        assert d_to_gl11(dinv(x)) == d_to_gl11(x).inverse()


# --- 11 -------------------------------------------------------------------

def test_criterion_11():
    start = time.perf_counter()
    for tau in ELLIPTIC_TAUS:
        ctx = EllipticContext(parse_tau(tau))
        pts = sample_points(ctx, ELLIPTIC_SAMPLES, seed=0)
        assert len(pts) == ELLIPTIC_SAMPLES
        for name, r in invariant_checks(ctx, pts).items():
            assert r < ELLIPTIC_EPS, (tau, name, r)
        for k, z in enumerate(pts):
            assert verify_affine_ideal(z, ctx).max() < ELLIPTIC_EPS, (tau, z)
            lam = complex(1 + k / 7, -k / 11)
            assert verify_homogeneous_ideal(embed(z, ctx).scaled(lam), ctx, lam=lam).max() < ELLIPTIC_EPS
    assert abs(EllipticContext(1j).g3) < ELLIPTIC_EPS
    assert time.perf_counter() - start < ELLIPTIC_BUDGET_S


# --- 12 -------------------------------------------------------------------

def test_criterion_12():
    rng = random.Random(0)
    for _ in range(200):
        tau = Scalar(Fraction(rng.randint(-4000, 4000), rng.randint(1, 97)),
                     Fraction(rng.randint(1, 3000), rng.randint(1, 997)))
        red, gamma = reduce_to_fundamental_domain(Tau(tau))
        assert in_fundamental_domain(red.value)
        (a, b), (c, d) = gamma
        assert a * d - b * c == 1
        assert mobius(gamma, tau) == red.value
        zt = complex(tau)
        assert abs((a * zt + b) / (c * zt + d) - complex(red.value)) <= FD_EPS * max(1.0, abs(complex(red.value)))
        again, g2 = reduce_to_fundamental_domain(red)
        assert again == red and g2 == ((1, 0), (0, 1))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
