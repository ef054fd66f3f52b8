import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from susy_kernel.atlas import (build_pi_line_atlas, build_projective_atlas,
                               build_supermanifold_from_theta, canonical_cocycle,
                               odd_part_cocycle, theta_witness)
from susy_kernel.superfn import (SuperFunction, SuperVectorField, parse_vector_field,
                                 pullback_form)
from susy_kernel.susy import (STD_CHART, SusyAutomorphismCandidate, SusyError, Tau,
                              canonical_coordinates, classify_c11_automorphism, commute,
                              d_squared, elliptic_action_generators, frame_parts,
                              in_fundamental_domain, is_susy, is_susy_automorphism, mobius,
                              reduce_to_fundamental_domain, standard_field, standard_structure,
                              susy_omega, transformed_field, unit_status,
                              verify_susy_structure)
from susy_kernel.symcore import Scalar, antiderivative, from_nf, sym
from susy_kernel.symcore.normal import NF, to_nf

from _gen import rand_coefficient, rand_poly, rand_scalar, rand_unit

seeds = st.integers(0, 100_000)
C = STD_CHART


def field(f: NF, g: NF) -> SuperVectorField:
    """f d/dzeta + g zeta d/dz."""
    return SuperVectorField(C, [SuperFunction(C, {(0,): g}), SuperFunction(C, {(): f})])


# --- frames ---------------------------------------------------------------

def test_unit_status():
    z = NF.var("z")
    assert unit_status(NF.const(Scalar(3))) is None
    assert unit_status(to_nf(sym("2*exp(3*z)", "z"))) is None
    assert unit_status(z) is not None
    assert unit_status(z, invertible=("z",)) is None
    assert unit_status(z + NF.const(Scalar(1)), invertible=("z",)) is not None


def test_standard_field_is_susy():
    v = is_susy(standard_field())
    assert v.ok
    assert d_squared(standard_field()) == parse_vector_field("d/dz", C)


def test_non_unit_frame_is_rejected():
    v = is_susy(parse_vector_field("z*d/dzeta + zeta*d/dz", C))
    assert not v.ok
    assert "z" in v.witness
    with pytest.raises(SusyError):
        frame_parts(parse_vector_field("d/dz", C))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_d_squared_formula(seed):
    rng = random.Random(seed)
    f = rand_unit(rng, allow_powers=True)
    g = rand_unit(rng, allow_powers=True)
    D2 = d_squared(field(f, g))
    expected = SuperVectorField(C, [SuperFunction(C, {(): f * g}),
                                    SuperFunction(C, {(0,): g * f.diff("z")})])
    assert D2 == expected


def test_d_squared_without_the_factor_f_is_wrong():
    f, g = to_nf(sym("2*exp(z)", "z")), NF.const(Scalar(3))
    D2 = d_squared(field(f, g))
    literal = SuperVectorField(C, [SuperFunction(C, {(): g}),
                                   SuperFunction(C, {(0,): g * f.diff("z")})])
    assert D2 != literal
    # for f = 1 both agree
    one = NF.const(Scalar(1))
    assert d_squared(field(one, g)) == SuperVectorField(C, [SuperFunction(C, {(): g}),
                                                           SuperFunction.zero(C)])


# --- canonical coordinates -----------------------------------------------

def rand_frame_unit(rng):
    kind = rng.randrange(3)
    c = NF.const(rand_scalar(rng, nonzero=True))
    if kind == 0:
        return c
    if kind == 1:
        a = rng.choice([-2, -1, 1, 2, Fraction(1, 2)])
        return c * to_nf(sym(f"exp({a}*z)", "z"))
    return c * NF.var("z") ** rng.choice([-2, -1, 1, 2])


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_canonical_coordinates_straighten_d(seed):
    rng = random.Random(seed)
    D = field(rand_frame_unit(rng), rand_frame_unit(rng))
    cc = canonical_coordinates(D, invertible=("z",))
    assert cc.exact
    assert set(cc.residuals.values()) == {"0"}
    assert transformed_field(cc, D) == parse_vector_field("d/deta + eta*d/dw", cc.morphism.target)


def test_exponential_frame_is_local_only():
    D = parse_vector_field("d/dzeta + exp(z)*zeta*d/dz", C)
    cc = canonical_coordinates(D)
    assert from_nf(to_nf(cc.w)) == sym("-exp(-z)", "z")
    assert not cc.global_injective
    assert cc.to_json()["scope"].startswith("local only")


def test_affine_frame_is_global():
    cc = canonical_coordinates(parse_vector_field("2*d/dzeta + 3*zeta*d/dz", C))
    assert cc.global_injective
    assert cc.to_json()["scope"] == "global"


def test_quadrature_fallback():
    D = parse_vector_field("d/dzeta + exp(z^2)*zeta*d/dz", C)
    with pytest.raises(SusyError):
        canonical_coordinates(D)
    cc = canonical_coordinates(D, numeric=True)
    assert cc.mode == "quadrature" and not cc.exact


# --- the pullback law -----------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(seeds)
def test_pullback_of_omega(seed):
    rng = random.Random(seed)
    f, g = rand_coefficient(rng), rand_coefficient(rng)
    F = SusyAutomorphismCandidate(from_nf(f), from_nf(g)).morphism()
    got = pullback_form(F, susy_omega())
    expected = type(got)(C, [SuperFunction(C, {(): f.diff("z")}),
                             SuperFunction(C, {(0,): -(g * g)})])
    assert got == expected


# --- automorphisms --------------------------------------------------------

def independent_predicate(f: NF, g: NF) -> bool:
    """deg f = 1 with leading coefficient a, g a nonzero constant with g^2 = a."""
    fp = f.diff("z")
    return (fp.diff("z").is_zero() and not fp.is_zero()
            and g.diff("z").is_zero() and g * g == fp)


def rand_candidate(rng):
    kind = rng.randrange(4)
    if kind == 0:          # genuine automorphism
        r = rand_scalar(rng, nonzero=True)
        a = r * r
        f = to_nf(sym(f"{a}*z + {rand_scalar(rng)}", "z"))
        g = NF.const(r * rng.choice([1, -1]))
    elif kind == 1:        # f = integral of g^2 + b with g non-constant
        g = rand_poly(rng, "z", rng.randint(1, 2))
        f = to_nf(antiderivative(from_nf(g * g), "z")) + NF.const(rand_scalar(rng))
    elif kind == 2:        # right shape, wrong scale
        r = rand_scalar(rng, nonzero=True)
        f = to_nf(sym(f"{r * r + Scalar(1)}*z", "z"))
        g = NF.const(r)
    else:                  # anything of degree <= 5
        f = rand_poly(rng, "z", rng.randint(0, 5))
        g = rand_poly(rng, "z", rng.randint(0, 5))
    return f, g


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_automorphism_verdict_matches_independent_predicate(seed):
    rng = random.Random(seed)
    f, g = rand_candidate(rng)
    v = is_susy_automorphism(SusyAutomorphismCandidate(from_nf(f), from_nf(g)))
    assert v.ok == independent_predicate(f, g)


def test_cubic_near_miss_is_rejected_as_not_invertible():
    v = is_susy_automorphism(SusyAutomorphismCandidate.parse("z^3/3", "z"))
    assert not v.ok
    assert v.t_from_f == v.t_from_g == "z^2"
    assert "invertible" in v.reason


def test_classification():
    a, b, sgn = classify_c11_automorphism(SusyAutomorphismCandidate.parse("4*z - 1", "-2"))
    assert (a, b, sgn) == (Scalar(4), Scalar(-1), "-")
    assert classify_c11_automorphism(SusyAutomorphismCandidate.parse("z^2", "1")) is None
    a, b, sgn = classify_c11_automorphism(SusyAutomorphismCandidate.parse("z + tau", "-1", params=("tau",)))
    assert (a, b, sgn) == (Scalar(1), sym("tau", "tau"), "-")


@pytest.mark.parametrize("tau", ["i", "2i", "1/4 + 2i"])
def test_lattice_generators(tau):
    t = Tau.parse(tau)
    gens = []
    for sa in (1, -1):
        for sb in (1, -1):
            A, B = elliptic_action_generators(t, sa, sb)
            gens += [A, B]
    for G in gens:
        v = is_susy_automorphism(G)
        assert v.ok and from_nf(to_nf(v.t)) == sym("1")
    for G in gens:
        for H in gens:
            assert commute(G, H)


# --- moduli ---------------------------------------------------------------

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=50)
positive = st.fractions(min_value=Fraction(1, 50), max_value=20, max_denominator=50)


@settings(max_examples=200, deadline=None)
@given(fractions, positive)
def test_fundamental_domain_reduction(re, im):
    tau = Scalar(re, im)
    red, gamma = reduce_to_fundamental_domain(Tau(tau))
    assert in_fundamental_domain(red.value)
    (a, b), (c, d) = gamma
    assert a * d - b * c == 1
    assert mobius(gamma, tau) == red.value
    z = complex(tau)
    assert abs((a * z + b) / (c * z + d) - complex(red.value)) <= 1e-12 * max(1.0, abs(complex(red.value)))
    again, gamma2 = reduce_to_fundamental_domain(red)
    assert again == red
    assert gamma2 == ((1, 0), (0, 1))


def test_reduction_boundary_ties():
    red, _ = reduce_to_fundamental_domain(Tau(Scalar(Fraction(1, 2), 1)))
    assert red.value == Scalar(Fraction(-1, 2), 1)
    # |tau| = 1 with positive real part goes to the left arc
    red, gamma = reduce_to_fundamental_domain(Tau(Scalar(Fraction(5, 13), Fraction(12, 13))))
    assert red.value == Scalar(Fraction(-5, 13), Fraction(12, 13))
    assert gamma == ((0, -1), (1, 0))


def test_tau_must_be_in_upper_half_plane():
    with pytest.raises(Exception):
        Tau.parse("1 - i")


# --- structures on atlases ------------------------------------------------

def test_p1_carries_a_susy_structure():
    A = build_projective_atlas(1, 1)
    rep = verify_susy_structure(A, standard_structure(A, {"1": -1}))
    assert rep.passed


def test_pi_line_carries_none_of_the_standard_structures():
    A = build_pi_line_atlas()
    for s in (1, -1):
        assert not verify_susy_structure(A, standard_structure(A, {"1": s})).passed


def test_theta_atlas_structure():
    A = build_projective_atlas(1, 1)
    v = theta_witness(odd_part_cocycle(A), canonical_cocycle(A))
    B = build_supermanifold_from_theta(v.theta)
    assert any(verify_susy_structure(B, standard_structure(B, {"1": s})).passed for s in (1, -1))
