"""Differential forms on the 4-dimensional model with jet coefficients.

A :class:`PForm` stores one coefficient per strictly increasing multi-index of
the coordinate differentials ``dx^1..dx^4``.  Coefficients are jet arrays
(see :mod:`kw4.jets`): order-1 forms carry first partials at the origin,
order-0 forms carry values only and refuse anything that would differentiate
them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegreeOverflow, OrderExhausted, OrderMismatch
from .jets import (
    DIM,
    JET_LEN,
    JetMatrix,
    MetricJet,
    _perm_sign,
    inverse_and_det,
    jet_det,
    jet_einsum,
    jet_matrix_inverse,
    jet_order,
    jprod,
    truncate,
)

INDICES: tuple[tuple[tuple[int, ...], ...], ...] = tuple(
    tuple(itertools.combinations(range(DIM), p)) for p in range(DIM + 1)
)
POSITION = tuple({idx: n for n, idx in enumerate(INDICES[p])} for p in range(DIM + 1))

_LEVI_CIVITA = np.zeros((DIM,) * DIM)
for _perm in itertools.permutations(range(DIM)):
    _LEVI_CIVITA[_perm] = _perm_sign(_perm)


def sort_index(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign and increasing form of a multi-index (sign 0 on repeats)."""
    if len(set(idx)) != len(idx):
        return 0, tuple(sorted(idx))
    order = sorted(range(len(idx)), key=lambda k: idx[k])
    return _perm_sign(order), tuple(idx[k] for k in order)


def _dtype(*arrays):
    return np.result_type(*arrays, np.float64)


@dataclass(frozen=True, eq=False)
class PForm:
    degree: int
    coeffs: np.ndarray  # (1 or 5, C(4, degree))

    def __post_init__(self):
        if not 0 <= self.degree <= DIM:
            raise DegreeOverflow(f"degree {self.degree} outside 0..{DIM}")
        c = np.asarray(self.coeffs)
        if c.ndim != 2 or c.shape[1] != len(INDICES[self.degree]):
            raise ValueError(f"coefficient table has shape {c.shape} for a {self.degree}-form")
        jet_order(c)
        c = c.astype(_dtype(c), copy=True)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return jet_order(self.coeffs)

    @classmethod
    def zero(cls, degree: int, order: int = 0, dtype=np.float64) -> "PForm":
        shape = (JET_LEN if order else 1, len(INDICES[degree]))
        return cls(degree, np.zeros(shape, dtype=dtype))

    @classmethod
    def from_terms(cls, degree: int, terms: Mapping[Sequence[int], object], order: int = 0) -> "PForm":
        """Build from ``{multi-index: coefficient}`` with 0-based indices in any order.

        Coefficients are scalars (order 0, or constant at order 1) or length-5
        jet vectors (order 1).
        """
        values = [np.asarray(v) for v in terms.values()]
        c = np.zeros((JET_LEN if order else 1, len(INDICES[degree])), dtype=_dtype(*values))
        for idx, v in zip(terms, values):
            sign, key = sort_index(tuple(idx))
            if len(key) != degree:
                raise ValueError(f"multi-index {idx} does not have length {degree}")
            if sign == 0:
                continue
            v = np.asarray(v)
            if v.ndim == 0:
                c[0, POSITION[degree][key]] += sign * v
            else:
                if order == 0:
                    raise OrderMismatch("jet coefficient given for an order-0 form")
                c[:, POSITION[degree][key]] += sign * v
        return cls(degree, c)

    @classmethod
    def basis(cls, idx: Sequence[int], order: int = 0) -> "PForm":
        """``dx^{i1} ^ ... ^ dx^{ip}`` for 0-based indices in any order."""
        return cls.from_terms(len(idx), {tuple(idx): 1.0}, order=order)

    @classmethod
    def from_dense(cls, dense: np.ndarray, degree: int) -> "PForm":
        """Read the increasing-index components of an antisymmetric jet tensor."""
        c = np.stack([dense[(slice(None),) + idx] for idx in INDICES[degree]], axis=-1)
        return cls(degree, c.reshape(dense.shape[0], len(INDICES[degree])))

    def dense(self) -> np.ndarray:
        """Antisymmetric component tensor, shape ``(k,) + (4,) * degree``."""
        k = self.coeffs.shape[0]
        out = np.zeros((k,) + (DIM,) * self.degree, dtype=self.coeffs.dtype)
        for n, idx in enumerate(INDICES[self.degree]):
            for perm in itertools.permutations(range(self.degree)):
                out[(slice(None),) + tuple(idx[q] for q in perm)] = _perm_sign(perm) * self.coeffs[:, n]
        return out

    def component(self, idx: Sequence[int]) -> np.ndarray:
        """Jet coefficient at a multi-index, with the permutation sign applied."""
        sign, key = sort_index(tuple(idx))
        if sign == 0:
            return np.zeros(self.coeffs.shape[0], dtype=self.coeffs.dtype)
        return sign * self.coeffs[:, POSITION[self.degree][key]]

    def value(self) -> np.ndarray:
        return self.coeffs[0]

    def truncate(self) -> "PForm":
        return PForm(self.degree, truncate(self.coeffs))

    def terms(self, atol: float = 0.0) -> dict[tuple[int, ...], np.ndarray]:
        return {
            idx: self.coeffs[:, n]
            for n, idx in enumerate(INDICES[self.degree])
            if np.max(np.abs(self.coeffs[:, n])) > atol
        }

    def _check(self, other: "PForm"):
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        if self.order != other.order:
            raise OrderMismatch("order mismatch")

    def __add__(self, other: "PForm") -> "PForm":
        self._check(other)
        return PForm(self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "PForm") -> "PForm":
        self._check(other)
        return PForm(self.degree, self.coeffs - other.coeffs)

    def __neg__(self) -> "PForm":
        return PForm(self.degree, -self.coeffs)

    def __mul__(self, scalar) -> "PForm":
        return PForm(self.degree, self.coeffs * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        parts = []
        for idx, c in self.terms().items():
            name = "^".join(f"dx{i + 1}" for i in idx) or "1"
            parts.append(f"{c[0]!r}*{name}")
        return f"PForm(degree={self.degree}, order={self.order}, " + (" + ".join(parts) or "0") + ")"


def _at_order(arr: np.ndarray, order: int) -> np.ndarray:
    if order == jet_order(arr):
        return arr
    if order == 0:
        return truncate(arr)
    raise OrderMismatch("an order-1 form needs order-1 metric and volume data")


def _metric_array(g) -> np.ndarray:
    if isinstance(g, MetricJet):
        return g.jet_matrix().data
    if isinstance(g, JetMatrix):
        return g.data
    g = np.asarray(g)
    if g.shape == (DIM, DIM):
        return g[None]
    return g


def _inverse_metric(g, order: int) -> np.ndarray:
    arr = _at_order(_metric_array(g), order)
    if order == 0:
        return inverse_and_det(arr[0])[0][None]
    return jet_matrix_inverse(JetMatrix(arr)).data


def _scale(m: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Jet product of a jet scalar ``(k,)`` with a jet tensor ``(k, ...)``."""
    return jprod(m.reshape(m.shape + (1,) * (arr.ndim - 1)), arr)


@dataclass(frozen=True, eq=False)
class VolumeElement:
    """The orientation 4-form as a jet multiple of ``dx^1^dx^2^dx^3^dx^4``."""

    coeff: np.ndarray  # (1 or 5,)
    orientation: str = "half-kahler-square"

    def __post_init__(self):
        c = np.asarray(self.coeff)
        jet_order(c)
        if c.ndim != 1:
            raise ValueError("volume coefficient must be a jet scalar")
        if not np.abs(c[0]) > 0:
            raise ValueError("volume element vanishes at the origin")
        c = c.astype(_dtype(c), copy=True)
        c.flags.writeable = False
        object.__setattr__(self, "coeff", c)

    @property
    def order(self) -> int:
        return jet_order(self.coeff)

    @classmethod
    def from_kahler(cls, omega: PForm) -> "VolumeElement":
        """``mu = 1/2 Omega ^ Omega``."""
        if omega.degree != 2:
            raise ValueError("Kahler form must be a 2-form")
        top = wedge(omega, omega)
        return cls(0.5 * top.coeffs[:, 0], "half-kahler-square")

    @classmethod
    def from_metric(cls, g, sign: int = 1) -> "VolumeElement":
        """``sign * sqrt|det g|`` (real metrics; principal root for complex ones)."""
        arr = _metric_array(g)
        det = jet_det(arr)
        if np.iscomplexobj(det):
            root = np.sqrt(det[0])
        else:
            root = np.sqrt(np.abs(det[0]))
            det = det * np.sign(det[0])
        c = np.empty_like(det)
        c[0] = root
        c[1:] = det[1:] / (2 * root)
        return cls(sign * c, "metric" if sign > 0 else "metric-reversed")

    def flipped(self) -> "VolumeElement":
        return VolumeElement(-self.coeff, self.orientation + "-flipped")

    def truncate(self) -> "VolumeElement":
        return VolumeElement(truncate(self.coeff), self.orientation)

    def form(self) -> PForm:
        return PForm(DIM, self.coeff[:, None])


def wedge(a: PForm, b: PForm) -> PForm:
    p, q = a.degree, b.degree
    if p + q > DIM:
        raise DegreeOverflow(f"wedge of degrees {p} and {q} exceeds {DIM}")
    order = min(a.order, b.order)
    ca, cb = _at_order(a.coeffs, order), _at_order(b.coeffs, order)
    out = np.zeros((ca.shape[0], len(INDICES[p + q])), dtype=np.result_type(ca, cb))
    for i, I in enumerate(INDICES[p]):
        for j, J in enumerate(INDICES[q]):
            sign, K = sort_index(I + J)
            if sign:
                out[:, POSITION[p + q][K]] += sign * jprod(ca[:, i], cb[:, j])
    return PForm(p + q, out)


def _inner_jet(a: PForm, b: PForm, g) -> np.ndarray:
    if a.degree != b.degree:
        raise ValueError("inner product needs forms of equal degree")
    order = min(a.order, b.order)
    ca, cb = _at_order(a.coeffs, order), _at_order(b.coeffs, order)
    ginv = _inverse_metric(g, order)
    total = np.zeros(ca.shape[0], dtype=np.result_type(ca, cb, ginv))
    for i, I in enumerate(INDICES[a.degree]):
        for j, J in enumerate(INDICES[b.degree]):
            gram = jet_det(ginv[:, list(I)][:, :, list(J)])
            total = total + jprod(jprod(ca[:, i], cb[:, j]), gram)
    return total


def form_inner(a: PForm, b: PForm, g):
    """Induced inner product ``<a, b>`` (Gram determinants of the inverse metric).

    Returns a :class:`~kw4.jets.Jet1` for order-1 inputs and a plain scalar
    for order-0 inputs.
    """
    from .jets import Jet1

    total = _inner_jet(a, b, g)
    return Jet1(total) if total.shape[0] == JET_LEN else total[0]


def hodge_star(a: PForm, g, mu: VolumeElement) -> PForm:
    """Hodge dual with ``w ^ *v = <w, v> mu``, built by raising indices."""
    p, order = a.degree, a.order
    ginv = _inverse_metric(g, order)
    m = _at_order(mu.coeff, order)
    alpha = a.dense()
    lower, upper = "abcd"[:p], "efgh"[:p]
    if p:
        subs = ",".join(f"{u}{l}" for u, l in zip(upper, lower)) + f",{lower}->{upper}"
        alpha = jet_einsum(subs, *([ginv] * p), alpha)
    # for increasing J only the complementary increasing I survives the epsilon contraction
    out = np.empty((alpha.shape[0], len(INDICES[DIM - p])), dtype=alpha.dtype)
    for n, J in enumerate(INDICES[DIM - p]):
        I = tuple(i for i in range(DIM) if i not in J)
        out[:, n] = _LEVI_CIVITA[I + J] * alpha[(slice(None),) + I]
    return PForm(DIM - p, _scale(m, out))


def exterior_derivative(a: PForm) -> PForm:
    """``d`` at the origin; consumes the stored partials, so the result has order 0."""
    if a.order == 0:
        raise OrderExhausted("exterior derivative needs an order-1 form")
    p = a.degree
    if p == DIM:
        raise DegreeOverflow("the exterior derivative of a 4-form is a 5-form")
    out = np.zeros((1, len(INDICES[p + 1])), dtype=a.coeffs.dtype)
    for n, K in enumerate(INDICES[p + 1]):
        acc = 0
        for k in range(p + 1):
            I = K[:k] + K[k + 1 :]
            acc = acc + (-1) ** k * a.coeffs[1 + K[k], POSITION[p][I]]
        out[0, n] = acc
    return PForm(p + 1, out)


def codifferential_2form(a: PForm, g, mu: VolumeElement) -> PForm:
    """``delta a = -* d * a`` at the origin for an order-1 2-form."""
    if a.degree != 2:
        raise ValueError("codifferential_2form needs a 2-form")
    if a.order != 1:
        raise OrderExhausted("codifferential needs an order-1 2-form")
    inner = hodge_star(a, g, mu)
    return -hodge_star(exterior_derivative(inner), g, mu)


def pullback_form(b: np.ndarray, a: PForm) -> PForm:
    """Pull ``a`` back along the linear map ``x = B x'``.

    Each covector transforms as ``(B* w)_j = sum_i w_i B[i, j]``; for order-1
    forms the derivative directions are carried along as well, so the result
    is the jet of the pulled-back field at the origin.
    """
    b = np.asarray(b)
    alpha = a.dense()
    p = a.degree
    lower, upper = "abcd"[:p], "efgh"[:p]
    if p:
        subs = f"n{lower}," + ",".join(f"{l}{u}" for l, u in zip(lower, upper)) + f"->n{upper}"
        alpha = np.einsum(subs, alpha, *([b] * p))
    if a.order == 1:
        alpha = np.concatenate([alpha[:1], np.einsum("n...,nm->m...", alpha[1:], b)])
    return PForm.from_dense(alpha, p)


def forms_close(a: PForm, b: PForm, atol: float) -> bool:
    a._check(b)
    return bool(np.max(np.abs(a.coeffs - b.coeffs), initial=0.0) <= atol)


def basis_forms(degree: int) -> list[PForm]:
    return [PForm.basis(idx) for idx in INDICES[degree]]


def iter_degrees() -> Iterable[int]:
    return range(DIM + 1)
