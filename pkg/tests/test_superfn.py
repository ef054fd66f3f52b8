import random

import pytest
from hypothesis import given, settings, strategies as st

from susy_kernel.superfn import (ChartError, ChartMorphism, SuperFunction, bracket,
                                 compose, exterior_d, identity_morphism, pair, parse_function,
                                 parse_one_form, parse_vector_field, pullback_fn, pullback_form)

from _gen import CHART_11, CHART_12, rand_field, rand_poly, rand_superfunction

seeds = st.integers(0, 100_000)
slow = settings(max_examples=25, deadline=None)


def sign(p, q):
    return -1 if p & q else 1


# --- superfunctions -------------------------------------------------------

def test_parse_and_print():
    f = parse_function("z^2 + 3*s2*s1", CHART_12)
    assert str(f) == "z^2 - 3*s1*s2"
    assert f.parity() == 0
    assert parse_function("s1", CHART_12) * parse_function("s1", CHART_12) == SuperFunction.zero(CHART_12)
    assert parse_function("-3*zeta", CHART_11).parity() == 1


def test_odd_derivative_is_left():
    f = parse_function("s1*s2", CHART_12)
    assert f.d_odd(0) == parse_function("s2", CHART_12)
    assert f.d_odd(1) == parse_function("-s1", CHART_12)


def test_inverse_of_even_unit():
    f = parse_function("1 + z*s1*s2", CHART_12)
    assert f * f.inverse() == SuperFunction.const(CHART_12, 1)
    with pytest.raises(Exception):
        parse_function("s1*s2", CHART_12).inverse()


def test_exp_of_superfunction_expands_nilpotent_part():
    f = parse_function("exp(z + s1*s2)", CHART_12)
    assert f == parse_function("exp(z) + exp(z)*s1*s2", CHART_12)


# --- vector fields --------------------------------------------------------

def rand_homogeneous(rng, chart=CHART_12):
    p = rng.randrange(2)
    return rand_field(rng, chart, p), p


@slow
@given(seeds)
def test_graded_antisymmetry(seed):
    rng = random.Random(seed)
    (X, p), (Y, q) = rand_homogeneous(rng), rand_homogeneous(rng)
    assert bracket(X, Y) == -sign(p, q) * bracket(Y, X)


@slow
@given(seeds)
def test_super_jacobi(seed):
    rng = random.Random(seed)
    (X, p), (Y, q), (Z, r) = (rand_homogeneous(rng) for _ in range(3))
    lhs = bracket(X, bracket(Y, Z))
    rhs = bracket(bracket(X, Y), Z) + sign(p, q) * bracket(Y, bracket(X, Z))
    assert lhs == rhs


@slow
@given(seeds)
def test_derivation_property(seed):
    rng = random.Random(seed)
    X, p = rand_homogeneous(rng)
    a = rng.randrange(2)
    f = rand_superfunction(rng, CHART_12, a, sparse=0.9)
    g = rand_superfunction(rng, CHART_12, rng.randrange(2), sparse=0.9)
    assert X(f * g) == X(f) * g + sign(p, a) * (f * X(g))


@slow
@given(seeds)
def test_bracket_agrees_with_commutator_of_operators(seed):
    rng = random.Random(seed)
    (X, p), (Y, q) = rand_homogeneous(rng), rand_homogeneous(rng)
    f = rand_superfunction(rng, CHART_12, rng.randrange(2), sparse=0.9)
    assert bracket(X, Y)(f) == X(Y(f)) - sign(p, q) * Y(X(f))


def test_bracket_rejects_inhomogeneous():
    X = parse_vector_field("d/dz + d/ds1", CHART_12)
    with pytest.raises(ChartError):
        bracket(X, X)


def test_vector_field_parse_and_print():
    D = parse_vector_field("d/dzeta + zeta*d/dz", CHART_11)
    assert D.parity() == 1
    assert str(D) == "zeta*d/dz + d/dzeta"
    D2 = bracket(D, D)
    assert D2 == parse_vector_field("2*d/dz", CHART_11)


# --- forms and pairing ----------------------------------------------------

def test_pairing_puts_field_coefficient_first():
    w = parse_one_form("s1*dz", CHART_12)
    X = parse_vector_field("s2*d/dz", CHART_12)
    assert pair(w, X) == parse_function("s2*s1", CHART_12)


@slow
@given(seeds)
def test_df_pairs_to_derivative(seed):
    rng = random.Random(seed)
    X, _ = rand_homogeneous(rng)
    f = rand_superfunction(rng, CHART_12, rng.randrange(2), sparse=0.9)
    # <df, X> = X(f) for the left-coefficient convention
    assert pair(exterior_d(f), X) == X(f)


# --- morphisms ------------------------------------------------------------

def rand_morphism(rng, chart=CHART_12):
    """z -> p(z) + q(z) s1 s2, s_k -> linear combination of s1, s2 with polynomial coefficients."""
    z = SuperFunction.even(chart, rand_poly(rng, "z", 2))
    z = z + SuperFunction(chart, {(0, 1): rand_poly(rng, "z", 1)})
    odd = []
    for _ in range(chart.n):
        odd.append(SuperFunction(chart, {(0,): rand_poly(rng, "z", 1), (1,): rand_poly(rng, "z", 1)}))
    return ChartMorphism(chart, chart, [z] + odd)


@slow
@given(seeds)
def test_pullback_is_a_ring_map(seed):
    rng = random.Random(seed)
    F = rand_morphism(rng)
    f = rand_superfunction(rng, CHART_12, rng.randrange(2))
    g = rand_superfunction(rng, CHART_12, rng.randrange(2))
    assert pullback_fn(F, f * g) == pullback_fn(F, f) * pullback_fn(F, g)
    assert pullback_fn(F, f + g) == pullback_fn(F, f) + pullback_fn(F, g)


@slow
@given(seeds)
def test_pullback_commutes_with_d(seed):
    rng = random.Random(seed)
    F = rand_morphism(rng)
    f = rand_superfunction(rng, CHART_12, rng.randrange(2))
    assert pullback_form(F, exterior_d(f)) == exterior_d(pullback_fn(F, f))


@slow
@given(seeds)
def test_composition_is_contravariant_on_functions(seed):
    rng = random.Random(seed)
    F, G = rand_morphism(rng), rand_morphism(rng)
    f = rand_superfunction(rng, CHART_12, rng.randrange(2))
    # compose(F, G) applies G first, so its pullback applies F* first
    assert pullback_fn(compose(F, G), f) == pullback_fn(G, pullback_fn(F, f))


def test_identity_morphism():
    rng = random.Random(5)
    F = rand_morphism(rng)
    Id = identity_morphism(CHART_12)
    assert compose(F, Id) == F == compose(Id, F)


def test_morphism_parity_checked():
    with pytest.raises(ChartError):
        ChartMorphism(CHART_11, CHART_11, ["zeta", "z"])
