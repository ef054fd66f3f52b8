import random

import pytest
from hypothesis import given, strategies as st

from susy_kernel.grassmann import (DNumber, GrassmannAlgebra, GrassmannError, PHI2,
                                   SuperMatrix, d_to_gl11, dinv, dmul, ginv, normalize_psi,
                                   phi_apply, psi_matrix, right_theta_action, vector_parity)

seeds = st.integers(0, 100_000)


def test_generators_anticommute_and_square_to_zero():
    alg = GrassmannAlgebra(3)
    t1, t2, t3 = alg.gens()
    assert t1 * t1 == alg.zero()
    assert t1 * t2 == -(t2 * t1)
    assert (t1 * t2) * t3 == t1 * (t2 * t3)
    assert str(t2 * t1) == "-h1*h2"


def test_algebra_is_interned():
    assert GrassmannAlgebra(2) is GrassmannAlgebra(2)
    with pytest.raises(GrassmannError):
        GrassmannAlgebra(2).gen(1) + GrassmannAlgebra(3).gen(1)


def test_parse():
    alg = GrassmannAlgebra(3)
    x = alg.parse("1 + 2*h1*h2 - h3")
    assert x.body == 1
    assert x.parity() is None
    assert alg.parse("h2*h1") == -alg.parse("h1*h2")


@given(seeds)
def test_ring_axioms(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(rng.randint(1, 4))
    x, y, z = (alg.random(rng) for _ in range(3))
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(seeds)
def test_supercommutativity(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(4)
    p, q = rng.randrange(2), rng.randrange(2)
    x, y = alg.random(rng, parity=p), alg.random(rng, parity=q)
    assert x * y == (-1) ** (p * q) * (y * x)


@given(seeds)
def test_inverse(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(rng.randint(0, 4))
    x = alg.random(rng, invertible=True)
    assert x * ginv(x) == alg.one()
    assert ginv(x) * x == alg.one()


def test_nilpotent_is_not_invertible():
    alg = GrassmannAlgebra(2)
    with pytest.raises(GrassmannError):
        ginv(alg.parse("h1*h2"))


# --- D-numbers ------------------------------------------------------------

def rand_d(rng, alg, invertible=True):
    return DNumber(alg.random(rng, parity=0, invertible=invertible), alg.random(rng, parity=1))


@given(seeds)
def test_d_group_law(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(3)
    x, y, z = (rand_d(rng, alg) for _ in range(3))
    one = DNumber(alg.one())
    assert dmul(dmul(x, y), z) == dmul(x, dmul(y, z))
    assert dmul(x, one) == x == dmul(one, x)
    assert dmul(x, dinv(x)) == one == dmul(dinv(x), x)


@given(seeds)
def test_d_embedding_is_a_homomorphism(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(3)
    x, y = rand_d(rng, alg), rand_d(rng, alg)
    assert d_to_gl11(dmul(x, y)) == d_to_gl11(x) @ d_to_gl11(y)
    assert d_to_gl11(dinv(x)) == d_to_gl11(x).inverse()


def test_d_rejects_bad_parity():
    alg = GrassmannAlgebra(2)
    with pytest.raises(GrassmannError):
        DNumber(alg.gen(1))
    with pytest.raises(GrassmannError):
        DNumber(alg.one(), alg.one())


# --- supermatrices --------------------------------------------------------

@given(seeds)
def test_supermatrix_inverse(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(3)
    M = SuperMatrix([[alg.random(rng, 0, invertible=True), alg.random(rng, 1)],
                     [alg.random(rng, 1), alg.random(rng, 0, invertible=True)]], 1, 1, 0)
    assert M @ M.inverse() == SuperMatrix.identity(alg, 1, 1)


def test_supermatrix_parity_checked():
    alg = GrassmannAlgebra(2)
    with pytest.raises(GrassmannError):
        SuperMatrix([[alg.one(), alg.one()], [alg.zero(), alg.one()]], 1, 1, 0)


# --- the odd involution ---------------------------------------------------

@given(seeds)
def test_psi_normalization(seed):
    rng = random.Random(seed)
    alg = GrassmannAlgebra(3)
    a, alpha = alg.random(rng, 0, invertible=True), alg.random(rng, 1)
    psi = psi_matrix(a, alpha)
    P = normalize_psi(psi)
    assert P @ psi @ P.inverse() == PHI2(alg)


def test_psi_normalization_with_opposite_sign_fails_for_nonzero_alpha():
    alg = GrassmannAlgebra(3)
    a, alpha = alg.parse("2 + h1*h2"), alg.parse("h3")
    psi = psi_matrix(a, alpha)
    ainv = ginv(a)
    Q = SuperMatrix([[ainv, alg.zero()], [-(ainv * alpha), alg.one()]], 1, 1, 0)
    assert Q @ psi @ Q.inverse() != PHI2(alg)
    # with alpha = 0 both signs agree
    psi0 = psi_matrix(a, alg.zero())
    Q0 = SuperMatrix([[ainv, alg.zero()], [alg.zero(), alg.one()]], 1, 1, 0)
    assert Q0 @ psi0 @ Q0.inverse() == PHI2(alg)


def test_psi_rejects_non_involutions():
    alg = GrassmannAlgebra(2)
    bad = SuperMatrix([[alg.zero(), alg.scalar(2)], [alg.scalar(2), alg.zero()]], 1, 1, 1)
    with pytest.raises(GrassmannError):
        normalize_psi(bad)


def test_phi_and_theta_action():
    alg = GrassmannAlgebra(2)
    t1 = alg.gen(1)
    v = (alg.one(), alg.scalar(2), t1, alg.zero())      # even vector
    assert vector_parity(v) == 0
    assert phi_apply(phi_apply(v)) == v
    w = right_theta_action(v)
    assert vector_parity(w) == 1
    # theta^2 = -1
    assert right_theta_action(w) == tuple(-c for c in v)
