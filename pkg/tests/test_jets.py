from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kw4.errors import OrderMismatch, SingularMetric, SingularValue
from kw4.jets import (
    Jet1,
    JetMatrix,
    MetricJet,
    ScalarRing,
    contract,
    inverse_and_det,
    jet_det,
    jet_exp_scale,
    jet_inv,
    jet_matrix_inverse,
    jet_mul,
    jprod,
    solve,
)

from strategies import RINGS, SEEDS, rng_of, uniform

H = 1e-4


def random_jet(rng, ring=ScalarRing.REAL) -> Jet1:
    return Jet1(uniform(rng, 5, ring))


def affine(j: Jet1):
    return lambda x: j.value + j.partials @ x


def central_gradient(f, h=H):
    out = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        out.append((f(e) - f(-e)) / (2 * h))
    return np.array(out)


# -- scalar jets


def test_coordinate_and_unit():
    x2 = Jet1.coordinate(1)
    assert x2.value == 0 and list(x2.partials) == [0, 1, 0, 0]
    assert Jet1.unit().value == 1


def test_product_of_coordinates_has_vanishing_gradient():
    p = Jet1.coordinate(0) * Jet1.coordinate(2)
    assert np.all(p.data == 0)


def test_shape_validation():
    with pytest.raises(ValueError):
        Jet1(np.zeros(4))


@given(SEEDS, RINGS)
def test_mul_matches_finite_differences(seed, ring):
    rng = rng_of(seed)
    a, b = random_jet(rng, ring), random_jet(rng, ring)
    p = jet_mul(a, b)
    fa, fb = affine(a), affine(b)
    grad = central_gradient(lambda x: fa(x) * fb(x))
    assert p.value == a.value * b.value
    assert np.max(np.abs(p.partials - grad)) < 1e-8


@given(SEEDS, RINGS)
def test_mul_associative_and_commutative(seed, ring):
    rng = rng_of(seed)
    a, b, c = (random_jet(rng, ring) for _ in range(3))
    left = jet_mul(a, jet_mul(b, c)).data
    right = jet_mul(jet_mul(a, b), c).data
    scale = max(1.0, np.max(np.abs(left)))
    assert np.max(np.abs(left - right)) <= 1e-12 * scale
    assert np.max(np.abs(jet_mul(a, b).data - jet_mul(b, a).data)) <= 1e-15 * scale


@given(SEEDS, RINGS)
def test_inverse_round_trip(seed, ring):
    rng = rng_of(seed)
    a = random_jet(rng, ring)
    if abs(a.value) < 1e-3:
        a = a + 1.0
    one = jet_mul(a, jet_inv(a)).data
    assert np.max(np.abs(one - Jet1.unit().data)) < 1e-12 * max(1.0, np.max(np.abs(a.partials / a.value)))


def test_inverse_of_zero_value_raises():
    with pytest.raises(SingularValue):
        jet_inv(Jet1.make(0.0, [1, 2, 3, 4]))
    with pytest.raises(ZeroDivisionError):
        Jet1.unit() / Jet1.coordinate(0)


def test_division_by_scalar_and_jet():
    a = Jet1.make(2.0, [1, 0, 0, 0])
    assert np.allclose((a / 2).data, [1, 0.5, 0, 0, 0])
    q = a / a
    assert np.allclose(q.data, Jet1.unit().data)


@given(SEEDS)
def test_exp_scale_matches_finite_differences(seed):
    df = rng_of(seed).uniform(-1, 1, 4)
    e = jet_exp_scale(0.3, df, -1.0)
    grad = central_gradient(lambda x: np.exp(-(0.3 + df @ x)))
    assert e.value == np.exp(-0.3)
    assert np.max(np.abs(e.partials - grad)) < 1e-8


@given(SEEDS, st.floats(-1, 1), st.sampled_from([2.0, 0.5, -3.0]))
def test_exp_scale_other_exponents(seed, f0, s):
    df = rng_of(seed).uniform(-1, 1, 4)
    e = jet_exp_scale(f0, df, s)
    f = lambda x: np.exp(s * (f0 + df @ x))  # noqa: E731
    grad = (4 * central_gradient(f, H / 2) - central_gradient(f, H)) / 3
    assert np.max(np.abs(e.partials - grad)) < 1e-8 * max(1.0, np.exp(abs(s)))


def test_order_mismatch():
    with pytest.raises(OrderMismatch):
        jprod(np.ones(5), np.ones(1))
    with pytest.raises(ValueError):
        jprod(np.ones(5), np.ones(3))


def test_order_zero_product():
    out = jprod(np.array([2.0]), np.array([3.0]))
    assert out.shape == (1,) and out[0] == 6.0


# -- contraction engine


@given(SEEDS)
def test_contract_agrees_with_einsum(seed):
    rng = rng_of(seed)
    a, b, c = rng.normal(size=(4, 4)), rng.normal(size=(4, 4, 4)), rng.normal(size=4)
    for subs, ops in [
        ("ij,jkl->ikl", (a, b)),
        ("ijk,k->ij", (b, c)),
        ("ij,jk,k->i", (a, a, c)),
        ("i,jk->ijk", (c, a)),
    ]:
        assert np.allclose(contract(subs, *ops), np.einsum(subs, *ops), atol=1e-13)


@given(SEEDS)
def test_contract_is_bitwise_ring_consistent(seed):
    rng = rng_of(seed)
    a, b = rng.normal(size=(4, 4)), rng.normal(size=(4, 4, 4))
    real = contract("ij,jkl,lm->ikm", a, b, a)
    cplx = contract("ij,jkl,lm->ikm", a.astype(complex), b.astype(complex), a.astype(complex))
    assert np.array_equal(real, cplx.real) and not np.any(cplx.imag)


# -- matrix jets


def random_jet_matrix(rng, ring=ScalarRing.REAL, max_cond=1e3) -> JetMatrix:
    while True:
        v = uniform(rng, (4, 4), ring) + 2 * np.eye(4)
        if np.linalg.cond(v) < max_cond:
            return JetMatrix.from_parts(v, uniform(rng, (4, 4, 4), ring))


@given(SEEDS, RINGS)
def test_matrix_inverse_round_trip(seed, ring):
    a = random_jet_matrix(rng_of(seed), ring)
    prod = (a @ jet_matrix_inverse(a)).data
    assert np.max(np.abs(prod - JetMatrix.identity().data)) < 1e-10


@given(SEEDS)
def test_matrix_inverse_derivative_identity(seed):
    a = random_jet_matrix(rng_of(seed))
    inv = np.linalg.inv(a.value)
    expected = -np.einsum("ij,njk,kl->nil", inv, a.partials, inv)
    assert np.max(np.abs(jet_matrix_inverse(a).partials - expected)) < 1e-10


@given(SEEDS)
def test_det_jet_matches_finite_differences(seed):
    a = random_jet_matrix(rng_of(seed))
    d = jet_det(a.data)
    assert d[0] == pytest.approx(np.linalg.det(a.value), rel=1e-12)
    grad = central_gradient(lambda x: np.linalg.det(a.value + np.einsum("n,nij->ij", x, a.partials)))
    assert np.max(np.abs(d[1:] - grad)) < 1e-6 * max(1.0, np.max(np.abs(grad)))


@given(SEEDS, RINGS)
def test_solve_and_inverse(seed, ring):
    rng = rng_of(seed)
    a = random_jet_matrix(rng, ring).value
    b = uniform(rng, 4, ring)
    x = solve(a, b)
    assert np.max(np.abs(a @ x - b)) < 1e-12
    inv, det = inverse_and_det(a)
    assert np.max(np.abs(inv @ a - np.eye(4))) < 1e-12
    assert abs(det - np.linalg.det(a)) < 1e-10 * abs(det)


def test_singular_guard_is_scale_invariant():
    a = np.diag([1.0, 1.0, 1.0, 1e-13])
    with pytest.raises(SingularMetric):
        inverse_and_det(a)
    inverse_and_det(1e-6 * np.diag([1.0, 1.0, 1.0, 0.5]))


# -- metric jets


def test_metric_validation():
    with pytest.raises(ValueError):
        MetricJet(np.triu(np.ones((4, 4))), np.zeros((4, 4, 4)))
    with pytest.raises(SingularMetric):
        MetricJet(np.zeros((4, 4)), np.zeros((4, 4, 4)))
    g1 = np.zeros((4, 4, 4))
    g1[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        MetricJet(np.eye(4), g1)


@given(SEEDS, st.floats(-1, 1))
def test_metric_evaluation_is_affine(seed, t):
    rng = rng_of(seed)
    g1 = rng.normal(size=(4, 4, 4))
    g1 = g1 + g1.transpose(0, 2, 1)
    m = MetricJet(np.eye(4), g1)
    x = np.array([t, 0, 0, 0])
    assert np.allclose(m.at(x), np.eye(4) + t * g1[0])
    assert m.astype(ScalarRing.COMPLEX).ring is ScalarRing.COMPLEX
