from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kw4.errors import DegreeOverflow, OrderExhausted
from kw4.forms import (
    INDICES,
    PForm,
    VolumeElement,
    basis_forms,
    codifferential_2form,
    exterior_derivative,
    form_inner,
    forms_close,
    hodge_star,
    pullback_form,
    wedge,
)
from kw4.jets import MetricJet, ScalarRing, jprod
from kw4.structures import NEUTRAL_G0, kahler_form, para_unitary, standard_models
from kw4.weyl import volume_element

from strategies import RINGS, SEEDS, models, rng_of, uniform

DEG = st.integers(0, 4)


def random_form(rng, p, order=1, ring=ScalarRing.REAL) -> PForm:
    k = 5 if order else 1
    return PForm(p, uniform(rng, (k, len(INDICES[p])), ring))


# -- algebra


def test_basis_and_terms():
    a = PForm.from_terms(2, {(2, 0): 3.0})
    assert a.component((0, 2))[0] == -3.0
    assert list(a.terms()) == [(0, 2)]
    assert a.dense()[0, 2, 0] == 3.0 and a.dense()[0, 0, 2] == -3.0


def test_repeated_index_is_zero():
    assert np.all(PForm.from_terms(2, {(1, 1): 1.0}).coeffs == 0)


def test_wedge_basics():
    e = [PForm.basis((i,)) for i in range(4)]
    assert wedge(e[0], e[1]).component((0, 1))[0] == 1
    assert wedge(e[1], e[0]).component((0, 1))[0] == -1
    assert np.all(wedge(e[2], e[2]).coeffs == 0)
    with pytest.raises(DegreeOverflow):
        wedge(PForm.basis((0, 1, 2)), PForm.basis((0, 1)))


@given(SEEDS, DEG, DEG)
def test_wedge_graded_commutative(seed, p, q):
    if p + q > 4:
        return
    rng = rng_of(seed)
    a, b = random_form(rng, p), random_form(rng, q)
    assert forms_close(wedge(a, b), wedge(b, a) * (-1) ** (p * q), 1e-12)


@given(SEEDS)
def test_wedge_associative(seed):
    rng = rng_of(seed)
    a, b, c = random_form(rng, 1), random_form(rng, 2), random_form(rng, 1)
    assert forms_close(wedge(a, wedge(b, c)), wedge(wedge(a, b), c), 1e-12)


@given(SEEDS, st.integers(0, 3), st.integers(0, 3))
def test_antiderivation(seed, p, q):
    if p + q + 1 > 4:
        return
    rng = rng_of(seed)
    a, b = random_form(rng, p), random_form(rng, q)
    left = exterior_derivative(wedge(a, b))
    right = wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)) * (-1) ** p
    assert forms_close(left, right, 1e-10)


def test_exterior_derivative_of_coordinate_product():
    # d(x^1 dx^2) = dx^1 ^ dx^2
    c = np.zeros((5, 4))
    c[1, 1] = 1.0
    assert exterior_derivative(PForm(1, c)).component((0, 1))[0] == 1.0


def test_exterior_derivative_errors():
    with pytest.raises(OrderExhausted):
        exterior_derivative(PForm.basis((0,)))
    with pytest.raises(DegreeOverflow):
        exterior_derivative(PForm.basis((0, 1, 2, 3), order=1))


# -- metric operations


@given(models())
@settings(max_examples=40, deadline=None)
def test_star_defining_relation(m):
    """``w ^ *v = <w, v> mu`` for basis forms, at value and partial level."""
    mu = volume_element(m)
    for p in range(5):
        for I, J in itertools.product(INDICES[p], repeat=2):
            w, v = PForm.basis(I, order=1), PForm.basis(J, order=1)
            lhs = wedge(w, hodge_star(v, m.metric, mu)).coeffs[:, 0]
            rhs = jprod(form_inner(w, v, m.metric).data, mu.coeff)
            assert np.max(np.abs(lhs - rhs)) < 1e-10 * max(1.0, np.max(np.abs(rhs)))


@given(models(), SEEDS, DEG)
@settings(max_examples=60, deadline=None)
def test_double_star(m, seed, p):
    g0 = m.metric.g0
    mu = volume_element(m).truncate()
    flat = MetricJet.flat(g0)
    a = random_form(rng_of(seed), p, order=0, ring=m.ring)
    twice = hodge_star(hodge_star(a, flat, mu), flat, mu)
    # mu^2 = det g0 for mu = 1/2 Omega^Omega, so the sign is (-1)^(p(4-p)) sign(det g0 / mu^2)
    assert abs(mu.coeff[0] ** 2 - np.linalg.det(g0)) < 1e-10 * abs(np.linalg.det(g0))
    sign = (-1) ** (p * (4 - p)) * np.sign((np.linalg.det(g0) / mu.coeff[0] ** 2).real)
    assert forms_close(twice, a * sign, 1e-10 * max(1.0, np.max(np.abs(a.coeffs))))


def test_star_on_flat_neutral_orientations():
    m = standard_models("para")
    mu = volume_element(m)
    assert mu.coeff[0] == -1.0  # 1/2 Omega^Omega = -dx^1^dx^2^dx^3^dx^4 here
    star = hodge_star(PForm.basis((0, 2)), m.metric, mu)
    assert star.terms() == {(1, 3): pytest.approx(np.array([-1.0]))}
    flipped = hodge_star(PForm.basis((0, 2)), m.metric, mu.flipped())
    assert flipped.component((1, 3))[0] == 1.0


def test_volume_from_metric_matches_kahler_up_to_sign():
    m = standard_models("complex", (0, 4))
    a = VolumeElement.from_metric(m.metric).coeff
    b = volume_element(m).coeff
    assert abs(abs(a[0]) - abs(b[0])) < 1e-15


@given(models())
@settings(max_examples=40, deadline=None)
def test_inner_product_symmetric(m):
    for p in (1, 2):
        forms = basis_forms(p)
        for a, b in itertools.combinations(forms, 2):
            assert abs(form_inner(a, b, m.metric.g0) - form_inner(b, a, m.metric.g0)) < 1e-12


@given(models())
@settings(max_examples=40, deadline=None)
def test_codifferential_self_dual_crosscheck(m):
    """If ``*Omega = e Omega`` then ``delta Omega = -e * d Omega``."""
    omega = kahler_form(m)
    mu = volume_element(m, omega)
    star = hodge_star(omega, m.metric, mu)
    e = 1 if np.max(np.abs(star.coeffs - omega.coeffs)) < 1e-10 else -1
    assert forms_close(star, omega * e, 1e-10)
    delta = codifferential_2form(omega, m.metric, mu)
    alt = hodge_star(exterior_derivative(omega), m.metric, mu) * (-e)
    assert forms_close(delta, alt, 1e-10)


def test_codifferential_requires_order_one_two_form():
    g = MetricJet.flat(NEUTRAL_G0)
    mu = VolumeElement(np.ones(5))
    with pytest.raises(OrderExhausted):
        codifferential_2form(PForm.basis((0, 1)), g, mu)
    with pytest.raises(ValueError):
        codifferential_2form(PForm.basis((0,), order=1), g, mu)


# -- pullback


@pytest.mark.parametrize("a", [0.5, -2.0, 1e-3])
def test_para_unitary_pullback(a):
    t = para_unitary(a)
    img = pullback_form(t, PForm.basis((0, 2)))
    assert img.terms() == {(0, 2): pytest.approx([1.0]), (1, 2): pytest.approx([a])}


@given(SEEDS, st.integers(0, 3), st.integers(0, 3))
def test_pullback_commutes_with_wedge_and_d(seed, p, q):
    rng = rng_of(seed)
    b = uniform(rng, (4, 4)) + np.eye(4)
    if p + q <= 4:
        x, y = random_form(rng, p), random_form(rng, q)
        assert forms_close(pullback_form(b, wedge(x, y)), wedge(pullback_form(b, x), pullback_form(b, y)), 1e-10)
    x = random_form(rng, p)
    assert forms_close(pullback_form(b, exterior_derivative(x)), exterior_derivative(pullback_form(b, x)), 1e-10)
