"""Levi-Civita and Weyl connections at the origin, and the Kahler-Weyl check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .forms import VolumeElement, codifferential_2form
from .jets import DIM, MetricJet, contract, inverse_and_det, jet_matrix_inverse, solve
from .structures import (
    NEUTRAL_G0,
    Model,
    Structure,
    StructureKind,
    kahler_form,
    pullback,
)

DEFAULT_TOL = 1e-9
RANK_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class Connection:
    """Christoffel symbols at the origin: ``gamma[i, j, k] = Gamma^k_ij``."""

    gamma: np.ndarray

    def torsion(self) -> float:
        return float(np.max(np.abs(self.gamma - self.gamma.transpose(1, 0, 2))))

    def covariant(self, i: int, j: int) -> np.ndarray:
        """Components of ``nabla_{d_i} d_j`` at the origin."""
        return self.gamma[i, j]


@dataclass(frozen=True, eq=False)
class LeeForm:
    phi: np.ndarray
    phi_sharp: np.ndarray


@dataclass(frozen=True, eq=False)
class NablaJ:
    """``value[i, j, k]`` is the ``k``-th component of ``(nabla_{d_i} J) d_j``."""

    value: np.ndarray

    def residual(self) -> float:
        return float(np.max(np.abs(self.value)))


@dataclass(frozen=True, eq=False)
class KWReport:
    residual: float
    phi: LeeForm
    passed: bool


def levi_civita(m: Model) -> Connection:
    g1 = m.metric.g1
    ginv = jet_matrix_inverse(m.metric.jet_matrix()).value
    lowered = g1 + g1.transpose(1, 0, 2) - g1.transpose(1, 2, 0)
    return Connection(0.5 * contract("kl,ijl->ijk", ginv, lowered))


def volume_element(m: Model, omega=None) -> VolumeElement:
    """Orientation ``mu = 1/2 Omega ^ Omega`` of the model."""
    return VolumeElement.from_kahler(kahler_form(m) if omega is None else omega)


def lee_form(m: Model) -> LeeForm:
    """``phi = 1/2 J delta Omega`` (para) or ``-1/2 J delta Omega`` (complex).

    ``J`` acts on 1-forms by ``(J a)(X) = a(J X)``.
    """
    omega = kahler_form(m)
    mu = volume_element(m, omega)
    delta = codifferential_2form(omega, m.metric, mu).value()
    sign = 0.5 if m.kind is StructureKind.PARA else -0.5
    phi = sign * contract("k,ki->i", delta, m.J)
    return LeeForm(phi, solve(m.metric.g0, phi))


def theta(m: Model, phi: LeeForm) -> np.ndarray:
    """``Theta[i, j, k]`` = ``k``-th component of ``phi(d_i) d_j + phi(d_j) d_i - g(d_i, d_j) phi#``."""
    eye = np.eye(DIM)
    return (
        contract("i,jk->ijk", phi.phi, eye)
        + contract("j,ik->ijk", phi.phi, eye)
        - contract("ij,k->ijk", m.metric.g0, phi.phi_sharp)
    )


def weyl_connection(m: Model, phi: LeeForm) -> Connection:
    return Connection(levi_civita(m).gamma + theta(m, phi))


def nabla_J(c: Connection, s: Structure) -> NablaJ:
    """Covariant derivative of a coordinate-constant J."""
    g, j = c.gamma, s.J
    return NablaJ(contract("imk,mj->ijk", g, j) - contract("ijm,km->ijk", g, j))


def verify_kw(m: Model, tol: float = DEFAULT_TOL) -> KWReport:
    phi = lee_form(m)
    residual = nabla_J(weyl_connection(m, phi), m.structure).residual()
    return KWReport(residual, phi, residual <= tol)


def uniqueness_matrix(m: Model) -> np.ndarray:
    """The linear map ``phi -> ([Theta_{d_i}, J])_i`` as a 64x4 matrix."""
    j = m.J
    ginv, _ = inverse_and_det(m.metric.g0)
    cols = []
    for a in range(DIM):
        e = np.zeros(DIM, dtype=ginv.dtype)
        e[a] = 1
        th = theta(m, LeeForm(e, ginv @ e))  # th[i, j, k] = (Theta_i)^k_j
        mats = th.transpose(0, 2, 1)
        comm = mats @ j - j @ mats
        cols.append(comm.reshape(-1))
    return np.stack(cols, axis=1)


def numerical_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def uniqueness_rank(m: Model) -> int:
    return numerical_rank(uniqueness_matrix(m))


def symmetric_product(i: int, j: int) -> np.ndarray:
    """``dx^i o dx^j = (dx^i (x) dx^j + dx^j (x) dx^i) / 2`` as a matrix (0-based)."""
    e = np.zeros((DIM, DIM))
    e[i, j] += 0.5
    e[j, i] += 0.5
    return e


#: symmetric products spanning the anti-invariant symmetric 2-tensors for the standard para J
ANTI_INVARIANT_SPAN = (
    symmetric_product(0, 2),
    symmetric_product(0, 3),
    symmetric_product(1, 2),
    symmetric_product(1, 3),
)


def kw_defect(structure: Structure, g0, g1, validate: bool = True) -> np.ndarray:
    """``(nabla^phi J)(0)`` for the affine metric ``g0 + sum x^i g1[i]``.

    With ``validate=False`` the compatibility check is skipped, which keeps
    the map defined (and linear in ``g1``) on arbitrary symmetric data.
    """
    m = Model(structure, MetricJet(g0, g1), validate=validate)
    return nabla_J(weyl_connection(m, lee_form(m)), structure).value


def linearization_map(
    s: Structure,
    basis: Sequence[np.ndarray] = ANTI_INVARIANT_SPAN,
    directions: Iterable[int] = range(DIM),
    g0=NEUTRAL_G0,
    validate: bool = True,
) -> np.ndarray:
    """Table of ``(nabla^phi J)(0)`` for the metrics ``g0 + x^i eps``.

    Returns shape ``(len(basis), len(directions), 4, 4, 4)``.
    """
    directions = list(directions)
    sign = s.kind.pullback_sign
    out = []
    for eps in basis:
        eps = np.asarray(eps)
        if validate and np.max(np.abs(pullback(s.J, eps) - sign * eps)) > 1e-12 * max(1.0, np.max(np.abs(eps))):
            raise ValueError(f"perturbation is not {s.kind.value}-compatible")
        rows = []
        for i in directions:
            g1 = np.zeros((DIM, DIM, DIM), dtype=np.result_type(eps, g0, np.float64))
            g1[i] = eps
            rows.append(kw_defect(s, g0, g1, validate=validate))
        out.append(rows)
    return np.asarray(out)
