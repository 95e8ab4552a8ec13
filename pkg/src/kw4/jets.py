"""First-order Taylor jets in four variables.

A jet array stores a quantity together with its first partial derivatives at
the origin along a leading axis: ``arr[0]`` is the value and ``arr[1 + i]`` is
the partial along ``x^(i+1)``.  The leading axis has length 5 for order-1 data
and length 1 for order-0 data (values only).  Everything downstream is built on
this layout; the scalar ring is the numpy dtype (``float64`` or
``complex128``), and all routines are written so that the same sequence of
floating point operations runs for both.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import OrderMismatch, SingularMetric, SingularValue

DIM = 4
JET_LEN = DIM + 1

#: relative determinant guard: |det A| < DET_RTOL * max|A_ij|**n is singular
DET_RTOL = 1e-12
#: absolute guard for scalar jet inversion
VALUE_ATOL = 1e-12


class ScalarRing(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64 if self is ScalarRing.REAL else np.complex128)

    @classmethod
    def of(cls, *arrays) -> "ScalarRing":
        """The smallest ring containing every argument."""
        if any(np.iscomplexobj(a) for a in arrays):
            return cls.COMPLEX
        return cls.REAL

    def cast(self, a) -> np.ndarray:
        if self is ScalarRing.REAL and np.iscomplexobj(a):
            raise TypeError("cannot cast complex data into the real ring")
        return np.asarray(a, dtype=self.dtype)


def magnitude(x) -> np.ndarray:
    return np.abs(x)


# ---------------------------------------------------------------------------
# jet-array primitives


def jet_order(a: np.ndarray) -> int:
    if a.shape[0] == JET_LEN:
        return 1
    if a.shape[0] == 1:
        return 0
    raise ValueError(f"leading jet axis must have length 1 or {JET_LEN}, got {a.shape[0]}")


def truncate(a: np.ndarray) -> np.ndarray:
    """Drop the partials, keeping an order-0 jet array."""
    return a[:1]


def constant_jet(value) -> np.ndarray:
    """Order-1 jet array of a quantity that does not depend on x."""
    value = np.asarray(value)
    out = np.zeros((JET_LEN,) + value.shape, dtype=np.result_type(value, np.float64))
    out[0] = value
    return out


def _common_order(*ops: np.ndarray) -> int:
    orders = {jet_order(op) for op in ops}
    if len(orders) != 1:
        raise OrderMismatch("cannot combine order-0 and order-1 jets; truncate explicitly")
    return orders.pop()


def jprod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise jet product (Leibniz rule), broadcasting trailing axes."""
    order = _common_order(a, b)
    value = a[0] * b[0]
    if order == 0:
        return value[None]
    out = np.empty((JET_LEN,) + value.shape, dtype=value.dtype)
    out[0] = value
    out[1:] = a[1:] * b[0] + a[0] * b[1:]
    return out


_SPARE = "ZYXWVUTSRQPONMLKJIHGFEDCBA"


def contract(subscripts: str, *operands) -> np.ndarray:
    """Explicit-mode einsum with a fixed, dtype-independent evaluation order.

    Operands are multiplied left to right on a broadcast grid and contracted
    axes are summed one slice at a time, so a complex run on data with zero
    imaginary parts repeats the real run operation for operation.  BLAS and
    the SIMD einsum kernels reorder sums differently for float64 and
    complex128, hence this helper on every engine path.
    """
    lhs, out = subscripts.replace(" ", "").split("->")
    terms = lhs.split(",")
    if len(terms) != len(operands):
        raise ValueError("subscripts do not match the number of operands")
    summed = []
    for t in terms:
        if len(set(t)) != len(t):
            raise ValueError(f"repeated index within one operand: {t!r}")
        summed += [c for c in t if c not in out and c not in summed]
    axes = out + "".join(summed)
    prod = None
    sizes = {}
    for t, op in zip(terms, operands):
        op = np.asarray(op)
        if op.ndim != len(t):
            raise ValueError(f"operand of rank {op.ndim} for subscripts {t!r}")
        sizes.update(zip(t, op.shape))
        perm = sorted(range(len(t)), key=lambda k: axes.index(t[k]))
        view = np.transpose(op, perm).reshape([op.shape[t.index(c)] if c in t else 1 for c in axes])
        prod = view if prod is None else prod * view
    for _ in summed:
        acc = prod[..., 0]
        for n in range(1, prod.shape[-1]):
            acc = acc + prod[..., n]
        prod = acc
    return np.broadcast_to(prod, tuple(sizes[c] for c in out)).copy()


def jet_einsum(subscripts: str, *operands: np.ndarray) -> np.ndarray:
    """:func:`contract` lifted to jet arrays by the product rule.

    Subscripts refer to the trailing (non-jet) axes only and must be explicit
    (contain ``->``).
    """
    order = _common_order(*operands)
    lhs, out = subscripts.replace(" ", "").split("->")
    terms = lhs.split(",")
    used = set(subscripts)
    d = next(c for c in _SPARE if c not in used)
    value = contract(subscripts, *(op[0] for op in operands))
    if order == 0:
        return value[None]
    result = np.empty((JET_LEN,) + value.shape, dtype=value.dtype)
    result[0] = value
    partial = None
    for k in range(len(operands)):
        subs = ",".join(d + t if j == k else t for j, t in enumerate(terms)) + "->" + d + out
        args = [op[1:] if j == k else op[0] for j, op in enumerate(operands)]
        term = contract(subs, *args)
        partial = term if partial is None else partial + term
    result[1:] = partial
    return result


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def jet_det(a: np.ndarray) -> np.ndarray:
    """Determinant of a small jet matrix ``(k, p, p)`` by permutation expansion."""
    p = a.shape[-1]
    if p == 0:
        out = np.zeros(a.shape[:1], dtype=a.dtype)
        out[0] = 1
        return out
    total = None
    for perm in itertools.permutations(range(p)):
        term = a[:, 0, perm[0]]
        for row in range(1, p):
            term = jprod(term, a[:, row, perm[row]])
        term = term * _perm_sign(perm)
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------------
# value-level linear algebra (one code path for real and complex)


def lu_factor(a: np.ndarray):
    """Partial-pivot LU of a square matrix; returns ``(lu, perm, det)``."""
    lu = np.array(a, copy=True)
    n = lu.shape[0]
    perm = np.arange(n)
    det = lu.dtype.type(1)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            det = -det
        pivot = lu[k, k]
        det = det * pivot
        if pivot == 0:
            continue
        # multiply by the reciprocal: complex division rounds differently from real division
        lu[k + 1 :, k] = lu[k + 1 :, k] * (1 / pivot)
        lu[k + 1 :, k + 1 :] = lu[k + 1 :, k + 1 :] - np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm, det


def lu_solve(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = lu.shape[0]
    x = np.array(b[perm], dtype=np.result_type(lu, b), copy=True)
    for i in range(n):
        for k in range(i):
            x[i] = x[i] - lu[i, k] * x[k]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            x[i] = x[i] - lu[i, k] * x[k]
        x[i] = x[i] * (1 / lu[i, i])
    return x


def is_singular(det, a: np.ndarray) -> bool:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return not abs(det) > DET_RTOL * scale ** a.shape[-1]


def inverse_and_det(a: np.ndarray, error=SingularMetric):
    """Matrix inverse with the scale-invariant singularity guard."""
    lu, perm, det = lu_factor(a)
    if is_singular(det, a):
        raise error(f"matrix is singular: |det| = {abs(det):.3e}")
    eye = np.eye(a.shape[0], dtype=lu.dtype)
    return lu_solve(lu, perm, eye), det


def solve(a: np.ndarray, b: np.ndarray, error=SingularMetric) -> np.ndarray:
    lu, perm, det = lu_factor(a)
    if is_singular(det, a):
        raise error(f"matrix is singular: |det| = {abs(det):.3e}")
    return lu_solve(lu, perm, b)


# ---------------------------------------------------------------------------
# scalar jets


@dataclass(frozen=True, eq=False)
class Jet1:
    """A scalar together with its four first partials at the origin."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.shape != (JET_LEN,):
            raise ValueError(f"Jet1 data must have shape ({JET_LEN},), got {data.shape}")
        data = data.astype(np.result_type(data, np.float64), copy=True)
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def make(cls, value, partials=(0, 0, 0, 0)) -> "Jet1":
        partials = np.asarray(partials)
        dtype = np.result_type(np.asarray(value), partials, np.float64)
        data = np.empty(JET_LEN, dtype=dtype)
        data[0] = value
        data[1:] = partials
        return cls(data)

    @classmethod
    def unit(cls, ring: ScalarRing = ScalarRing.REAL) -> "Jet1":
        return cls(ring.cast([1, 0, 0, 0, 0]))

    @classmethod
    def coordinate(cls, i: int, ring: ScalarRing = ScalarRing.REAL) -> "Jet1":
        """The jet of the coordinate function ``x^(i+1)``."""
        data = np.zeros(JET_LEN, dtype=ring.dtype)
        data[1 + i] = 1
        return cls(data)

    @property
    def value(self):
        return self.data[0]

    @property
    def partials(self) -> np.ndarray:
        return self.data[1:]

    @property
    def ring(self) -> ScalarRing:
        return ScalarRing.of(self.data)

    def __add__(self, other):
        if isinstance(other, Jet1):
            return Jet1(self.data + other.data)
        return Jet1(self.data + np.eye(1, JET_LEN)[0] * other)

    __radd__ = __add__

    def __neg__(self):
        return Jet1(-self.data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet1):
            return jet_mul(self, other)
        return Jet1(self.data * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet1):
            return jet_mul(self, jet_inv(other))
        return Jet1(self.data * (1 / other))

    def __repr__(self):
        return f"Jet1(value={self.value!r}, partials={self.partials.tolist()!r})"


def jet_mul(a: Jet1, b: Jet1) -> Jet1:
    return Jet1(jprod(a.data, b.data))


def jet_inv(a: Jet1, atol: float = VALUE_ATOL) -> Jet1:
    v = a.value
    if not magnitude(v) > atol:
        raise SingularValue(f"cannot invert a jet with value {v!r}")
    inv = 1 / v
    return Jet1(np.concatenate([[inv], -a.partials * (inv * inv)]))


def jet_exp_scale(f0, df, s) -> Jet1:
    """Jet of ``exp(s * f)`` from the 1-jet ``(f0, df)`` of ``f``."""
    df = np.asarray(df)
    e = np.exp(s * f0)
    return Jet1.make(e, s * df * e)


# ---------------------------------------------------------------------------
# matrix jets


@dataclass(frozen=True, eq=False)
class JetMatrix:
    """A 4x4 matrix of jets stored as a ``(5, 4, 4)`` array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.shape != (JET_LEN, DIM, DIM):
            raise ValueError(f"JetMatrix data must have shape (5, 4, 4), got {data.shape}")
        data = data.astype(np.result_type(data, np.float64), copy=True)
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_parts(cls, value, partials) -> "JetMatrix":
        value = np.asarray(value)
        partials = np.asarray(partials)
        data = np.empty((JET_LEN, DIM, DIM), dtype=np.result_type(value, partials, np.float64))
        data[0] = value
        data[1:] = partials
        return cls(data)

    @classmethod
    def identity(cls, ring: ScalarRing = ScalarRing.REAL) -> "JetMatrix":
        return cls(constant_jet(np.eye(DIM, dtype=ring.dtype)))

    @property
    def value(self) -> np.ndarray:
        return self.data[0]

    @property
    def partials(self) -> np.ndarray:
        return self.data[1:]

    def entry(self, i: int, j: int) -> Jet1:
        return Jet1(self.data[:, i, j])

    def __matmul__(self, other: "JetMatrix") -> "JetMatrix":
        return JetMatrix(jet_einsum("ij,jk->ik", self.data, other.data))


def jet_matrix_inverse(a: JetMatrix) -> JetMatrix:
    """Inverse jet matrix: LU inverse of the value, ``-A^-1 (dA) A^-1`` for partials."""
    inv, _ = inverse_and_det(a.value)
    partials = -contract("ij,njk,kl->nil", inv, a.partials, inv)
    return JetMatrix.from_parts(inv, partials)


@dataclass(frozen=True, eq=False)
class MetricJet:
    """The 1-jet of a metric at the origin.

    ``g1[i, j, k]`` is the partial of ``g_jk`` along ``x^(i+1)``; the metric
    near the origin is the affine field ``g0 + sum_i x^i g1[i]``.
    """

    g0: np.ndarray
    g1: np.ndarray

    def __post_init__(self):
        g0 = np.asarray(self.g0)
        g1 = np.asarray(self.g1)
        dtype = np.result_type(g0, g1, np.float64)
        g0 = g0.astype(dtype, copy=True)
        g1 = g1.astype(dtype, copy=True)
        if g0.shape != (DIM, DIM) or g1.shape != (DIM, DIM, DIM):
            raise ValueError("metric jet needs g0 of shape (4, 4) and g1 of shape (4, 4, 4)")
        scale = max(1.0, float(np.max(np.abs(g0))), float(np.max(np.abs(g1))))
        if np.max(np.abs(g0 - g0.T)) > 1e-12 * scale:
            raise ValueError("g0 is not symmetric")
        if np.max(np.abs(g1 - g1.transpose(0, 2, 1))) > 1e-12 * scale:
            raise ValueError("g1 is not symmetric in its last two slots")
        _, _, det = lu_factor(g0)
        if is_singular(det, g0):
            raise SingularMetric(f"metric is degenerate at the origin: |det g0| = {abs(det):.3e}")
        for arr in (g0, g1):
            arr.flags.writeable = False
        object.__setattr__(self, "g0", g0)
        object.__setattr__(self, "g1", g1)

    @classmethod
    def flat(cls, g0) -> "MetricJet":
        g0 = np.asarray(g0)
        return cls(g0, np.zeros((DIM,) * 3, dtype=np.result_type(g0, np.float64)))

    @property
    def ring(self) -> ScalarRing:
        return ScalarRing.of(self.g0)

    def jet_matrix(self) -> JetMatrix:
        return JetMatrix.from_parts(self.g0, self.g1)

    def at(self, x) -> np.ndarray:
        """Evaluate the affine metric field at the point ``x``."""
        return self.g0 + np.einsum("i,ijk->jk", np.asarray(x), self.g1)

    def astype(self, ring: ScalarRing) -> "MetricJet":
        return MetricJet(ring.cast(self.g0), ring.cast(self.g1))
