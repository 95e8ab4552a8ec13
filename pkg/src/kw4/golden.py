"""Closed-form reference data used by the CLI golden checks.

Indices are 0-based throughout (``dx^1`` is index 0).
"""

from __future__ import annotations

import numpy as np

from .forms import PForm, hodge_star
from .jets import DIM, MetricJet, jet_exp_scale
from .structures import NEUTRAL_G0, PARA_J, Model, Structure, StructureKind, kahler_form
from .weyl import volume_element

#: Hodge star of coordinate forms for the flat neutral metric, oriented by 1/2 Omega^Omega
STAR_TABLE: tuple[tuple[tuple[int, ...], float, tuple[int, ...]], ...] = (
    ((0, 2), -1.0, (1, 3)),
    ((1, 3), -1.0, (0, 2)),
    ((0, 1, 2), -1.0, (1,)),
    ((0, 1, 3), 1.0, (0,)),
    ((0, 2, 3), -1.0, (3,)),
    ((1, 2, 3), 1.0, (2,)),
)


def _name(idx) -> str:
    return "^".join(f"e{i + 1}" for i in idx)


def star_table(flip_orientation: bool = False) -> list[dict]:
    """Evaluate the star of each table entry; rows carry expected and computed coefficients."""
    m = Model(Structure(StructureKind.PARA, PARA_J), MetricJet.flat(NEUTRAL_G0))
    mu = volume_element(m)
    if flip_orientation:
        mu = mu.flipped()
    rows = []
    for src, sign, dst in STAR_TABLE:
        star = hodge_star(PForm.basis(src), m.metric, mu)
        want = PForm.from_terms(len(dst), {dst: sign * (-1 if flip_orientation else 1)})
        deviation = float(np.max(np.abs(star.coeffs - want.coeffs)))
        rows.append(
            {
                "form": _name(src),
                "expected": f"{'-' if want.component(dst)[0] < 0 else ''}{_name(dst)}",
                "computed": {_name(k): float(v[0]) for k, v in star.terms().items()},
                "deviation": deviation,
            }
        )
    return rows


def warped_model(f) -> Model:
    """Flat neutral model with ``g(d2, d4) = exp(2 f)``, ``f(0) = 0``, ``df(0) = f``."""
    f = np.asarray(f, dtype=float)
    g1 = np.zeros((DIM,) * 3)
    scale = jet_exp_scale(0.0, f, 2.0)
    g1[:, 1, 3] = g1[:, 3, 1] = scale.partials
    return Model(Structure(StructureKind.PARA, PARA_J), MetricJet(NEUTRAL_G0 * 1.0, g1))


def warped_expected(f) -> dict[str, np.ndarray]:
    """Closed forms for :func:`warped_model` at the origin."""
    f1, f2, f3, f4 = (float(x) for x in f)
    gamma = np.zeros((DIM,) * 3)

    def put(i, j, vec):
        gamma[i, j] = gamma[j, i] = vec

    put(0, 1, [0, f1, 0, 0])
    put(0, 3, [0, 0, 0, f1])
    put(2, 1, [0, f3, 0, 0])
    put(2, 3, [0, 0, 0, f3])
    put(3, 3, [0, 0, 0, 2 * f4])
    put(1, 1, [0, 2 * f2, 0, 0])
    put(1, 3, [-f3, 0, -f1, 0])

    theta = np.zeros((DIM,) * 3)

    def put_t(i, j, vec):
        theta[i, j] = theta[j, i] = vec

    put_t(0, 0, [-2 * f1, 0, 0, 0])
    put_t(0, 1, [0, -f1, 0, 0])
    put_t(0, 3, [0, 0, 0, -f1])
    put_t(1, 2, [0, -f3, 0, 0])
    put_t(1, 3, [f3, 0, f1, 0])
    put_t(2, 2, [0, 0, -2 * f3, 0])
    put_t(2, 3, [0, 0, 0, -f3])

    nabla_lc = np.zeros((DIM,) * 3)
    nabla_lc[1, 2] = [0, -2 * f3, 0, 0]
    nabla_lc[1, 3] = [2 * f3, 0, 0, 0]
    nabla_lc[3, 0] = [0, 0, 0, 2 * f1]
    nabla_lc[3, 1] = [0, 0, -2 * f1, 0]

    star_omega = np.zeros((5, 6))  # dx13 + exp(2f) dx24
    star_omega[0, 1] = 1.0
    star_omega[0, 4] = 1.0
    star_omega[1:, 4] = [2 * f1, 2 * f2, 2 * f3, 2 * f4]

    return {
        "gamma": gamma,
        "theta": theta,
        "nabla_lc_J": nabla_lc,
        "star_omega": star_omega,
        "d_star_omega": np.array([0, 2 * f1, 0, -2 * f3]),  # dx123, dx124, dx134, dx234
        "delta_omega": np.array([-2 * f1, 0, 2 * f3, 0]),
        "phi": np.array([-f1, 0, -f3, 0]),
        "phi_sharp": np.array([-f3, 0, -f1, 0]),
    }


def warped_check(f) -> dict[str, float]:
    """Deviation of every computed quantity from :func:`warped_expected`, plus the KW residual."""
    from .forms import codifferential_2form, exterior_derivative
    from .weyl import lee_form, levi_civita, nabla_J, theta, weyl_connection

    m = warped_model(f)
    exp = warped_expected(f)
    omega = kahler_form(m)
    mu = volume_element(m, omega)
    star = hodge_star(omega, m.metric, mu)
    phi = lee_form(m)
    lc = levi_civita(m)
    weyl = weyl_connection(m, phi)
    dev = {
        "gamma": np.max(np.abs(lc.gamma - exp["gamma"])),
        "theta": np.max(np.abs(theta(m, phi) - exp["theta"])),
        "nabla_lc_J": np.max(np.abs(nabla_J(lc, m.structure).value - exp["nabla_lc_J"])),
        "star_omega": np.max(np.abs(star.coeffs - exp["star_omega"])),
        "d_star_omega": np.max(np.abs(exterior_derivative(star).value() - exp["d_star_omega"])),
        "delta_omega": np.max(np.abs(codifferential_2form(omega, m.metric, mu).value() - exp["delta_omega"])),
        "phi": np.max(np.abs(phi.phi - exp["phi"])),
        "phi_sharp": np.max(np.abs(phi.phi_sharp - exp["phi_sharp"])),
        "kw_residual": nabla_J(weyl, m.structure).residual(),
    }
    return {k: float(v) for k, v in dev.items()}
