import cmath

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from susy_kernel.elliptic import (EllipticContext, EllipticError, embed, in_sample_patch,
                                  invariant_checks, parse_tau, sample_points,
                                  verify_affine_ideal, verify_homogeneous_ideal, wp, wp1,
                                  wp1_prime, wp_direct, wp_laurent, wp_prime)

TAUS = ["i", "2i", "1/4 + 2i"]
TOL = 1e-8


@pytest.fixture(scope="module", params=TAUS)
def ctx(request):
    return EllipticContext(parse_tau(request.param))


def test_lemniscatic_invariants():
    # square lattice Z + iZ: g2 = Gamma(1/4)^8 / (16 pi^2), g3 = 0
    c = EllipticContext(1j)
    expected = float(mpmath.gamma(0.25) ** 8 / (16 * mpmath.pi ** 2))
    assert abs(c.g2 - expected) < 1e-9 * expected
    assert abs(c.g3) < TOL


@pytest.mark.parametrize("tau", [2j, 0.25 + 2j, 0.1 + 1.3j])
def test_modular_weights(tau):
    # lattice Z + tau Z scales to Z + (-1/tau) Z by 1/tau
    a, b = EllipticContext(tau), EllipticContext(-1 / tau)
    assert abs(b.g2 - tau ** 4 * a.g2) < 1e-9 * abs(tau ** 4 * a.g2)
    assert abs(b.g3 - tau ** 6 * a.g3) < 1e-9 * abs(tau ** 6 * a.g3)


def test_against_direct_lattice_sum(ctx):
    for z in (0.3 + 0.2 * ctx.tau, 0.71 + 0.45 * ctx.tau):
        ref = wp_direct(z, ctx.tau, 200)
        assert abs(wp(z, ctx) - ref) < 1e-6 * max(1.0, abs(ref))


def test_against_laurent_series_near_origin(ctx):
    for z in (0.02, 0.015j, 0.01 + 0.01j):
        ref = wp_laurent(z, ctx)
        assert abs(wp(z, ctx) - ref) < 1e-9 * abs(ref)


def test_periodicity_and_parity(ctx):
    z = 0.31 + 0.27 * ctx.tau
    w = wp(z, ctx)
    for shifted in (z + 1, z + ctx.tau, -z):
        assert abs(wp(shifted, ctx) - w) < 1e-10 * max(1.0, abs(w))


def test_derivative_matches_difference_quotient(ctx):
    z, h = 0.37 + 0.41 * ctx.tau, 1e-5
    fd = (wp(z + h, ctx) - wp(z - h, ctx)) / (2 * h)
    assert abs(wp_prime(z, ctx) - fd) < 1e-5 * max(1.0, abs(fd))


def test_invariant_identities(ctx):
    pts = sample_points(ctx, 20, seed=0)
    for name, r in invariant_checks(ctx, pts).items():
        assert r < TOL, name


def test_affine_ideal_residuals(ctx):
    for z in sample_points(ctx, 20, seed=1):
        res = verify_affine_ideal(z, ctx)
        assert res.max() < TOL, (z, res)


def test_homogeneous_ideal_residuals(ctx):
    for k, z in enumerate(sample_points(ctx, 20, seed=2)):
        P = embed(z, ctx)
        lam = cmath.rect(0.5 + k / 10, k)
        res = verify_homogeneous_ideal(P.scaled(lam), ctx, lam=lam)
        assert res.max() < TOL, (z, res)


def test_square_root_branch(ctx):
    for z in sample_points(ctx, 10, seed=3):
        r = wp1(z, ctx)
        assert abs(r * r - (wp(z, ctx) - ctx.e1)) < 1e-10 * max(1.0, abs(r * r))
        # 2 wp1 wp1' = wp'
        assert abs(2 * r * wp1_prime(z, ctx) - wp_prime(z, ctx)) < 1e-8 * max(1.0, abs(wp_prime(z, ctx)))


def test_square_root_branch_is_continuous(ctx):
    z0 = 0.25 + 0.25 * ctx.tau
    prev = wp1(z0, ctx)
    for k in range(1, 40):
        z = z0 + k * 0.01 * (1 + ctx.tau)
        cur = wp1(z, ctx)
        assert abs(cur - prev) < 0.25 * max(1.0, abs(prev))
        prev = cur


def test_sabotaged_half_period_value_fails(ctx):
    z = sample_points(ctx, 1, seed=4)[0]
    res = verify_affine_ideal(z, ctx, e1=ctx.e1 + 0.5)
    assert res.max() > 1e-3


def test_sample_patch_excludes_special_points(ctx):
    assert not in_sample_patch(0.5, ctx)
    assert not in_sample_patch(ctx.tau / 2 + 0.01, ctx)
    assert in_sample_patch(0.25 + 0.25 * ctx.tau, ctx)
    assert all(in_sample_patch(z, ctx) for z in sample_points(ctx, 20, seed=5))


def test_bad_tau():
    with pytest.raises(EllipticError):
        EllipticContext(1 - 1j)
    with pytest.raises(Exception):
        parse_tau("i +")


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.9, 3.0), st.integers(0, 1000))
def test_cubic_relation_for_random_lattices(re, im, seed):
    c = EllipticContext(complex(re, im))
    for z in sample_points(c, 3, seed=seed):
        x, y = wp(z, c), wp_prime(z, c)
        rhs = 4 * x ** 3 - c.g2 * x - c.g3
        assert abs(y * y - rhs) < TOL * max(1.0, abs(rhs), abs(y * y))
