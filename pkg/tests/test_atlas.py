import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from susy_kernel.atlas import (Atlas, AtlasError, LineBundleCocycle, build_pi_line_atlas,
                               build_projective_atlas, build_supermanifold_from_theta,
                               canonical_cocycle, cocycle_product, cocycle_sqrt,
                               cocycle_square, degree, odd_part_cocycle, theta_witness,
                               verify_cocycle)
from susy_kernel.superfn import ChartMorphism, ChartSpec, compose, identity_morphism
from susy_kernel.symcore import Scalar
from susy_kernel.symcore.normal import NF

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "atlases"
PROJ = [(1, 0), (1, 1), (2, 3), (3, 2)]


@pytest.mark.parametrize("m,n", PROJ)
def test_projective_cocycles(m, n):
    A = build_projective_atlas(m, n)
    rep = verify_cocycle(A)
    assert rep.passed
    assert all(c["residual"] == {} for c in rep.checks)
    kinds = {c["kind"] for c in rep.checks}
    assert kinds == ({"inverse", "triple"} if m >= 2 else {"inverse"})


def test_projective_chart_count():
    A = build_projective_atlas(3, 2)
    assert len(A.charts) == 4
    assert len(A.transitions) == 12
    with pytest.raises(AtlasError):
        build_projective_atlas(6, 0)


def test_pi_line_is_an_involution():
    A = build_pi_line_atlas()
    psi = A.transition("0", "1")
    assert psi == A.transition("1", "0")
    assert compose(psi, psi) == identity_morphism(psi.source)
    assert verify_cocycle(A).passed


def test_sabotaged_transition_is_caught():
    A = build_pi_line_atlas()
    c = A.charts["0"]
    bad = ChartMorphism(c, A.charts["1"], ["1/u", "xi/u"])
    rep = verify_cocycle(A.with_transition("0", "1", bad))
    assert not rep.passed
    assert rep.failing is not None
    assert rep.residual


@pytest.mark.parametrize("name,m,n", [("p1_0", 1, 0), ("p1_1", 1, 1), ("p2_3", 2, 3), ("p3_2", 3, 2)])
def test_fixture_files_round_trip(name, m, n):
    text = (FIXTURES / f"{name}.json").read_text()
    A = Atlas.loads(text)
    assert A.dumps() == text
    assert A.transitions == build_projective_atlas(m, n).transitions
    assert verify_cocycle(A).passed


def test_pi_fixture():
    A = Atlas.loads((FIXTURES / "pi_line.json").read_text())
    assert A.transitions == build_pi_line_atlas().transitions


def test_bad_schema():
    data = json.loads((FIXTURES / "p1_0.json").read_text())
    data["schema"] = 99
    with pytest.raises(AtlasError):
        Atlas.from_json(data)


# --- random two-chart atlases --------------------------------------------

C0 = ChartSpec(("x",), ("a",))
C1 = ChartSpec(("y",), ("b",))


def affine_pair(rng):
    """y = p x + q, b = r a and its exact inverse."""
    p = rng.choice([Scalar(1), Scalar(2), Scalar(-3), Scalar(0, 1)])
    q = rng.randint(-3, 3)
    r = rng.choice([Scalar(1), Scalar(-1), Scalar(2), Scalar(1, 1)])
    pi, ri = Scalar(1) / p, Scalar(1) / r
    fwd = ChartMorphism(C0, C1, [f"{p}*x + {q}", f"{r}*a"])
    back = ChartMorphism(C1, C0, [f"{pi}*(y - {q})", f"{ri}*b"])
    return fwd, back


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_random_affine_atlases_pass_and_perturbations_fail(seed):
    rng = random.Random(seed)
    fwd, back = affine_pair(rng)
    A = Atlas({"0": C0, "1": C1}, {("0", "1"): fwd, ("1", "0"): back})
    assert verify_cocycle(A).passed
    wrong = ChartMorphism(C1, C0, [str(back.images[0]) + " + 1", str(back.images[1])])
    assert not verify_cocycle(A.with_transition("1", "0", wrong)).passed


# --- line bundles ---------------------------------------------------------

@pytest.mark.parametrize("A", [build_projective_atlas(1, 1), build_pi_line_atlas()], ids=["p1_1", "pi"])
def test_canonical_and_odd_cocycles_verify(A):
    assert canonical_cocycle(A).verify().passed
    assert odd_part_cocycle(A).verify().passed


def test_line_bundles_need_a_curve():
    with pytest.raises(AtlasError):
        canonical_cocycle(build_projective_atlas(2, 1))


def test_degrees_on_p1():
    A = build_projective_atlas(1, 1)
    L, K = odd_part_cocycle(A), canonical_cocycle(A)
    assert degree(L) == -1
    assert degree(K) == -2
    assert degree(cocycle_square(L)) == -2
    assert degree(cocycle_product(L, K)) == -3


def test_p1_theta_witness_is_plus_minus_i_over_u():
    A = build_projective_atlas(1, 1)
    v = theta_witness(odd_part_cocycle(A), canonical_cocycle(A))
    assert v.exists
    assert v.theta.holds()
    g = v.theta.L.g[("0", "1")]
    u = NF.var("u1_0")
    assert g in (NF.const(Scalar(0, 1)) / u, NF.const(Scalar(0, -1)) / u)


def test_pi_line_has_no_theta_witness():
    A = build_pi_line_atlas()
    v = theta_witness(odd_part_cocycle(A), canonical_cocycle(A))
    assert not v.exists
    assert (v.degree_L, v.degree_square, v.degree_K) == (-2, -4, -2)
    assert v.theta is None and v.reason


def test_square_root_of_canonical():
    K = canonical_cocycle(build_projective_atlas(1, 0))
    roots = cocycle_sqrt(K)
    assert roots is not None
    for L in roots:
        assert L.verify().passed
        assert cocycle_square(L) == K
    assert cocycle_sqrt(odd_part_cocycle(build_projective_atlas(1, 1))) is None


def test_supermanifold_from_theta():
    A = build_projective_atlas(1, 1)
    v = theta_witness(odd_part_cocycle(A), canonical_cocycle(A))
    B = build_supermanifold_from_theta(v.theta)
    assert verify_cocycle(B).passed
    # its odd line bundle is the theta characteristic again
    assert odd_part_cocycle(B).g == v.theta.L.g


def test_broken_cocycle_is_caught():
    A = build_projective_atlas(1, 0)
    K = canonical_cocycle(A)
    g = dict(K.g)
    g[("0", "1")] = g[("0", "1")] * NF.const(Scalar(2))
    rep = LineBundleCocycle(K.base, g, "broken").verify()
    assert not rep.passed
