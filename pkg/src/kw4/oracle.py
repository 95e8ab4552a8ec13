"""Finite-difference cross-check of the jet engine.

Nothing here uses jet arithmetic.  The affine metric field is sampled at
stencil points, the Hodge star is obtained by solving its defining relation
``w_i ^ *w_j = <w_i, w_j> mu`` as a linear system at each point, and
derivatives are central differences with one Richardson step.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import SingularMetric
from .structures import Model, StructureKind

_COMBOS = [list(itertools.combinations(range(4), p)) for p in range(5)]


def _parity(seq) -> int:
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inversions % 2 else 1


def _wedge_pairing(p: int) -> np.ndarray:
    """``e^I ^ e^K = W[I, K] dx^1234`` for increasing I (degree p), K (degree 4-p)."""
    rows, cols = _COMBOS[p], _COMBOS[4 - p]
    w = np.zeros((len(rows), len(cols)))
    for a, i in enumerate(rows):
        for b, k in enumerate(cols):
            if not set(i) & set(k):
                w[a, b] = _parity(i + k)
    return w


_PAIRING = [_wedge_pairing(p) for p in range(5)]


def _pfaffian(a: np.ndarray):
    return a[0, 1] * a[2, 3] - a[0, 2] * a[1, 3] + a[0, 3] * a[1, 2]


def _star_matrix(g: np.ndarray, mu, p: int) -> np.ndarray:
    """Matrix of the Hodge star on increasing-index coefficient vectors."""
    ginv = np.linalg.inv(g)
    idx = _COMBOS[p]
    gram = np.array([[np.linalg.det(ginv[np.ix_(i, j)]) if p else 1.0 for j in idx] for i in idx])
    return np.linalg.solve(_PAIRING[p], gram * mu)


def _metric_at(m: Model, x: np.ndarray) -> np.ndarray:
    g = m.metric.g0 + np.tensordot(x, m.metric.g1, axes=1)
    if abs(np.linalg.det(g)) < 1e-12 * np.max(np.abs(g)) ** 4:
        raise SingularMetric(f"metric degenerates at stencil point {x}")
    return g


def _star_kahler(m: Model, x: np.ndarray) -> np.ndarray:
    g = _metric_at(m, x)
    omega = g @ m.J
    coeffs = np.array([omega[i, j] for i, j in _COMBOS[2]])
    return _star_matrix(g, _pfaffian(omega), 2) @ coeffs


def _richardson(f, h: float) -> np.ndarray:
    """Partials of ``f`` at the origin along each axis, stacked on axis 0."""
    out = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0

        def central(step):
            return (f(step * e) - f(-step * e)) / (2 * step)

        out.append((4 * central(h / 2) - central(h)) / 3)
    return np.array(out)


@dataclass(frozen=True, eq=False)
class OracleResult:
    phi: np.ndarray
    phi_sharp: np.ndarray
    gamma: np.ndarray  # Levi-Civita, gamma[i, j, k] = Gamma^k_ij
    weyl_gamma: np.ndarray
    nabla_J: np.ndarray  # nabla_J[i, j, k]


def fd_oracle(m: Model, h: float = 1e-4) -> OracleResult:
    if not 1e-6 <= h <= 1e-2:
        raise ValueError("step size must lie in [1e-6, 1e-2]")
    origin = np.zeros(4)
    g = _metric_at(m, origin)
    ginv = np.linalg.inv(g)
    j = m.J

    # Levi-Civita from differentiated metric samples
    dg = _richardson(lambda x: _metric_at(m, x), h)  # dg[i, a, b] = d_i g_ab
    gamma = np.zeros((4, 4, 4), dtype=np.result_type(dg, ginv))
    for i, a, k in itertools.product(range(4), repeat=3):
        gamma[i, a, k] = 0.5 * sum(
            ginv[k, l] * (dg[i, a, l] + dg[a, i, l] - dg[l, i, a]) for l in range(4)
        )

    # delta Omega = - * d * Omega
    dstar = _richardson(lambda x: _star_kahler(m, x), h)  # dstar[i, n] = d_i (*Omega)_n
    two = {c: n for n, c in enumerate(_COMBOS[2])}
    d3 = np.array(
        [sum((-1) ** k * dstar[c[k], two[c[:k] + c[k + 1 :]]] for k in range(3)) for c in _COMBOS[3]]
    )
    mu0 = _pfaffian(g @ j)
    delta = -_star_matrix(g, mu0, 3) @ d3
    sign = 0.5 if m.kind is StructureKind.PARA else -0.5
    phi = sign * np.array([sum(delta[a] * j[a, i] for a in range(4)) for i in range(4)])
    phi_sharp = np.linalg.solve(g, phi)

    weyl = gamma.copy()
    for i, a in itertools.product(range(4), repeat=2):
        weyl[i, a] += g[i, a] * -phi_sharp
        weyl[i, a, a] += phi[i]
        weyl[i, a, i] += phi[a]

    # (nabla_i J) = [Gamma_i, J] with Gamma_i[k, m] = Gamma^k_im
    nj = np.array([(weyl[i].T @ j - j @ weyl[i].T).T for i in range(4)])
    return OracleResult(phi, phi_sharp, gamma, weyl, nj)
