"""Closed-form reference values: the flat neutral star table and the warped model."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings

from kw4.forms import PForm, codifferential_2form, hodge_star
from kw4.golden import STAR_TABLE, star_table, warped_check, warped_expected, warped_model
from kw4.structures import kahler_form
from kw4.weyl import lee_form, levi_civita, verify_kw, volume_element

from strategies import SEEDS, rng_of

F_EXAMPLE = (0.3, -0.1, 0.7, 0.2)


def test_star_table_exact():
    rows = star_table()
    assert len(rows) == 6
    assert [r["expected"] for r in rows] == ["-e2^e4", "-e1^e3", "-e2", "e1", "-e4", "e3"]
    for row in rows:
        assert row["deviation"] == 0.0
        ((name, coeff),) = row["computed"].items()
        assert row["expected"] == ("-" if coeff < 0 else "") + name
        assert abs(coeff) == 1.0


def test_star_table_flipped_orientation():
    for plain, flipped in zip(star_table(), star_table(flip_orientation=True)):
        assert flipped["deviation"] == 0.0
        assert {k: -v for k, v in plain["computed"].items()} == flipped["computed"]


def test_star_table_entries_are_integers():
    for src, sign, dst in STAR_TABLE:
        assert sign in (1.0, -1.0) and len(src) + len(dst) == 4


def test_warped_example_values():
    dev = warped_check(F_EXAMPLE)
    assert max(dev.values()) == 0.0
    phi = lee_form(warped_model(F_EXAMPLE)).phi
    assert np.allclose(phi, [-0.3, 0, -0.7, 0], atol=1e-15)


@given(SEEDS)
@settings(max_examples=20, deadline=None)
def test_warped_model_random(seed):
    f = rng_of(seed).uniform(-1, 1, 4)
    dev = warped_check(f)
    assert dev["kw_residual"] < 1e-12
    for key, val in dev.items():
        assert val < 1e-12, key


def test_warped_spot_values():
    f1, f2, f3, f4 = F_EXAMPLE
    m = warped_model(F_EXAMPLE)
    g = levi_civita(m).gamma
    assert np.allclose(g[1, 3], [-f3, 0, -f1, 0])  # nabla_{d2} d4
    assert np.allclose(g[3, 3], [0, 0, 0, 2 * f4])
    omega = kahler_form(m)
    mu = volume_element(m, omega)
    star = hodge_star(omega, m.metric, mu)
    assert np.allclose(star.coeffs, -omega.coeffs)
    delta = codifferential_2form(omega, m.metric, mu)
    assert np.allclose(delta.value(), [-2 * f1, 0, 2 * f3, 0])
    assert verify_kw(m).residual < 1e-12
    exp = warped_expected(F_EXAMPLE)
    assert np.allclose(exp["phi_sharp"], lee_form(m).phi_sharp)
