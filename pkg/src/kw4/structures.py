"""(Para-)Hermitian model data at a point: structures, metric jets, group actions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateProjection,
    InvalidModel,
    InvalidStructure,
    SingularTransform,
    UnsupportedSignature,
)
from .forms import PForm
from .jets import (
    DET_RTOL,
    DIM,
    MetricJet,
    ScalarRing,
    contract,
    inverse_and_det,
    is_singular,
    jet_einsum,
    jet_exp_scale,
    jprod,
    lu_factor,
)

STRUCTURE_TOL = 1e-12
COMPAT_TOL = 1e-10
MAX_DRAWS = 100


class StructureKind(str, enum.Enum):
    PARA = "para"
    COMPLEX = "complex"

    @property
    def square(self) -> int:
        """J^2 = square * Id."""
        return 1 if self is StructureKind.PARA else -1

    @property
    def pullback_sign(self) -> int:
        """J*g = pullback_sign * g for a compatible metric."""
        return -1 if self is StructureKind.PARA else 1


def pullback(j: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(J*b)(X, Y) = b(JX, JY)`` applied to the last two slots of ``b``."""
    b = np.asarray(b)
    lead = "abcdefgh"[: b.ndim - 2]
    return contract(f"{lead}kl,ki,lj->{lead}ij", b, j, j)


def _scale(*arrays) -> float:
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays])


@dataclass(frozen=True, eq=False)
class Structure:
    kind: StructureKind
    J: np.ndarray

    def __post_init__(self):
        kind = StructureKind(self.kind)
        j = np.asarray(self.J)
        j = j.astype(np.result_type(j, np.float64), copy=True)
        if j.shape != (DIM, DIM):
            raise InvalidStructure(f"J must be 4x4, got {j.shape}")
        tol = STRUCTURE_TOL * _scale(j) ** 2
        if np.max(np.abs(j @ j - kind.square * np.eye(DIM))) > tol:
            raise InvalidStructure(f"J^2 != {kind.square:+d} Id")
        if abs(np.trace(j)) > tol:
            raise InvalidStructure("trace(J) != 0")
        j.flags.writeable = False
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "J", j)

    @property
    def ring(self) -> ScalarRing:
        return ScalarRing.of(self.J)

    def astype(self, ring: ScalarRing) -> "Structure":
        return Structure(self.kind, ring.cast(self.J))


def compatibility_defect(structure: Structure, metric: MetricJet) -> float:
    """Largest slot-wise violation of ``J*g = -g`` (para) or ``J*g = g`` (complex)."""
    s = structure.kind.pullback_sign
    j = structure.J
    d0 = np.max(np.abs(pullback(j, metric.g0) - s * metric.g0))
    d1 = np.max(np.abs(pullback(j, metric.g1) - s * metric.g1))
    return float(max(d0, d1))


@dataclass(frozen=True, eq=False)
class Model:
    structure: Structure
    metric: MetricJet
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not self.validate:
            return
        s, g = self.structure, self.metric
        tol = COMPAT_TOL * _scale(g.g0, g.g1) * _scale(s.J) ** 2
        defect = compatibility_defect(s, g)
        if defect > tol:
            raise InvalidModel(f"metric is not {s.kind.value}-compatible (defect {defect:.3e})")
        _, _, det = lu_factor(g.g0 - pullback(s.J, g.g0))
        if s.kind is StructureKind.PARA and is_singular(det, g.g0):
            raise InvalidModel("det(g0 - J*g0) vanishes")

    @property
    def kind(self) -> StructureKind:
        return self.structure.kind

    @property
    def J(self) -> np.ndarray:
        return self.structure.J

    @property
    def ring(self) -> ScalarRing:
        return ScalarRing.of(self.structure.J, self.metric.g0, self.metric.g1)

    def astype(self, ring: ScalarRing) -> "Model":
        return Model(self.structure.astype(ring), self.metric.astype(ring), self.validate)


def project_compatible(g0raw, g1raw, structure: Structure) -> MetricJet:
    """Compatible part of a raw metric jet.

    Para: ``(b - J*b) / 2``; complex: ``(b + J*b) / 2``, slot-wise on ``g0``
    and on every ``g1[i]``.
    """
    s = structure.kind.pullback_sign
    j = structure.J
    g0raw = np.asarray(g0raw)
    g1raw = np.asarray(g1raw)
    g0 = 0.5 * (g0raw + s * pullback(j, g0raw))
    g1 = 0.5 * (g1raw + s * pullback(j, g1raw))
    _, _, det = lu_factor(g0 - pullback(j, g0) if s < 0 else g0)
    scale = float(np.max(np.abs(g0raw)))
    if not abs(det) > DET_RTOL * scale**DIM:
        raise DegenerateProjection(f"projected metric is degenerate (|det| = {abs(det):.3e})")
    return MetricJet(g0, g1)


def kahler_form(m: Model) -> PForm:
    """``Omega(X, Y) = g(X, J Y)`` as an order-1 2-form.

    For an unvalidated model the antisymmetric part is used, which keeps the
    downstream maps linear in ``g1`` on arbitrary symmetric data.
    """
    g = m.metric.jet_matrix().data
    j = np.zeros((g.shape[0], DIM, DIM), dtype=m.J.dtype)
    j[0] = m.J
    omega = jet_einsum("ik,kj->ij", g, j)
    if not m.validate:
        omega = 0.5 * (omega - omega.transpose(0, 2, 1))
    defect = np.max(np.abs(omega + omega.transpose(0, 2, 1)))
    if defect > COMPAT_TOL * _scale(omega):
        raise InvalidModel(f"Kahler form is not antisymmetric (defect {defect:.3e})")
    return PForm.from_dense(omega, 2)


def nijenhuis(jjet, kind: StructureKind | None = None) -> np.ndarray:
    """Nijenhuis tensor at the origin of a J field given by its 1-jet.

    ``jjet`` is a ``(5, 4, 4)`` array (value and partials of ``J^k_j``).
    Returns ``N[a, b, k]``, the ``k``-th component of ``N(d_a, d_b)``.  The
    para sign pattern is used when ``J^2 = Id`` and the complex one when
    ``J^2 = -Id``; pass ``kind`` to choose explicitly.
    """
    jjet = np.asarray(getattr(jjet, "data", jjet))
    j, dj = jjet[0], jjet[1:]  # dj[m, k, a] = d_m J^k_a
    if kind is None:
        sq = j @ j
        if np.allclose(sq, np.eye(DIM), atol=1e-10):
            kind = StructureKind.PARA
        elif np.allclose(sq, -np.eye(DIM), atol=1e-10):
            kind = StructureKind.COMPLEX
        else:
            raise InvalidStructure("J^2 is neither Id nor -Id at the origin")
    # [J d_a, d_b] = -d_b J^k_a d_k ; [d_a, J d_b] = d_a J^k_b d_k
    br_ja_b = -np.einsum("bka->abk", dj)
    br_a_jb = np.einsum("akb->abk", dj)
    br_ja_jb = np.einsum("ma,mkb->abk", j, dj) - np.einsum("mb,mka->abk", j, dj)
    j_of = lambda t: np.einsum("kl,abl->abk", j, t)  # noqa: E731
    mixed = j_of(br_ja_b) + j_of(br_a_jb)
    if StructureKind(kind) is StructureKind.PARA:
        return -mixed + br_ja_jb
    return mixed - br_ja_jb


def gl4_action(a, m: Model) -> Model:
    """Push the model forward along the linear change of basis ``x' = A x``.

    ``J -> A J A^-1``, ``g0 -> A^-T g0 A^-1`` and each derivative slice is
    also re-expressed along the new coordinate directions.
    """
    a = np.asarray(a)
    ainv, _ = inverse_and_det(a, error=SingularTransform)
    j = a @ m.J @ ainv
    g0 = ainv.T @ m.metric.g0 @ ainv
    g1 = np.einsum("ji,ab,jbc,cd->iad", ainv, ainv.T, m.metric.g1, ainv)
    g0 = 0.5 * (g0 + g0.T)
    g1 = 0.5 * (g1 + g1.transpose(0, 2, 1))
    return Model(Structure(m.kind, j), MetricJet(g0, g1))


def para_unitary(a) -> np.ndarray:
    """Linear map with ``T*e1 = e1 + a e2`` and ``T*e4 = e4 - a e3``, other coframe fixed.

    Preserves the standard para structure and the flat neutral metric.
    """
    t = np.eye(DIM, dtype=np.result_type(a, np.float64))
    t[0, 1] = a
    t[3, 2] = -a
    return t


def conformal_rescale(m: Model, f0, df) -> Model:
    """1-jet of ``exp(2f) g`` for the 1-jet ``(f0, df)`` of ``f``; J is unchanged."""
    e = jet_exp_scale(f0, df, 2).data
    g = jprod(e[:, None, None], m.metric.jet_matrix().data)
    return Model(m.structure, MetricJet(g[0], g[1:]))


# ---------------------------------------------------------------------------
# canonical and random models

PARA_J = np.diag([1.0, 1.0, -1.0, -1.0])
NEUTRAL_G0 = np.array(
    [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float
)
COMPLEX_J = np.array(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float
)


def parse_signature(signature) -> tuple[int, int]:
    if isinstance(signature, str):
        signature = tuple(int(s) for s in signature.replace("(", "").replace(")", "").split(","))
    signature = tuple(int(s) for s in signature)
    if signature not in ((2, 2), (0, 4)):
        raise UnsupportedSignature(f"signature {signature} is not (2,2) or (0,4)")
    return signature


def standard_structure(kind: StructureKind) -> Structure:
    kind = StructureKind(kind)
    return Structure(kind, PARA_J if kind is StructureKind.PARA else COMPLEX_J)


def standard_models(kind, signature=(2, 2), positive: bool = False) -> Model:
    """Canonical flat model of the given kind and signature.

    ``positive`` swaps the negative-definite (0,4) metric for ``+Id``.
    """
    kind = StructureKind(kind)
    signature = parse_signature(signature)
    if kind is StructureKind.PARA:
        if signature != (2, 2):
            raise UnsupportedSignature("para-Hermitian metrics have neutral signature")
        g0 = NEUTRAL_G0
    elif signature == (0, 4):
        g0 = np.eye(DIM) if positive else -np.eye(DIM)
    else:
        g0 = np.diag([1.0, 1.0, -1.0, -1.0])
    return Model(standard_structure(kind), MetricJet.flat(g0))


def _uniform(rng: np.random.Generator, shape, ring: ScalarRing) -> np.ndarray:
    x = rng.uniform(-1.0, 1.0, size=shape)
    if ring is ScalarRing.COMPLEX:
        x = x + 1j * rng.uniform(-1.0, 1.0, size=shape)
    return x


def _signature_ok(g0: np.ndarray, signature) -> bool:
    ev = np.linalg.eigvalsh(g0)
    if signature == (0, 4):
        return bool(np.all(ev < 0))
    return int(np.sum(ev > 0)) == 2


def random_symmetric(rng: np.random.Generator, ring: ScalarRing = ScalarRing.REAL):
    """Raw symmetric ``g0`` and ``g1`` (symmetric in the last two slots)."""
    g0 = _uniform(rng, (DIM, DIM), ring)
    g1 = _uniform(rng, (DIM, DIM, DIM), ring)
    return 0.5 * (g0 + g0.T), 0.5 * (g1 + g1.transpose(0, 2, 1))


def random_model(
    rng: np.random.Generator,
    kind=StructureKind.PARA,
    signature=(2, 2),
    ring: ScalarRing = ScalarRing.REAL,
    structure: Structure | None = None,
    max_cond: float | None = 100.0,
) -> Model:
    """Random compatible model: uniform raw entries, projected, redrawn on failure.

    Real complex-kind draws are redrawn until ``g0`` has the requested
    signature; for (0,4) the raw ``g0`` is drawn as ``-R R^T`` so that the
    projection stays negative definite.  Draws with ``cond(g0) > max_cond``
    are also rejected.
    """
    kind = StructureKind(kind)
    signature = parse_signature(signature)
    if kind is StructureKind.PARA and signature != (2, 2):
        raise UnsupportedSignature("para-Hermitian metrics have neutral signature")
    structure = structure if structure is not None else standard_structure(kind)
    check_signature = ring is ScalarRing.REAL and kind is StructureKind.COMPLEX
    for _ in range(MAX_DRAWS):
        g0raw, g1raw = random_symmetric(rng, ring)
        if check_signature and signature == (0, 4):
            r = _uniform(rng, (DIM, DIM), ring)
            g0raw = -(r @ r.T)
        try:
            metric = project_compatible(g0raw, g1raw, structure)
        except DegenerateProjection:
            continue
        if check_signature and not _signature_ok(metric.g0, signature):
            continue
        if max_cond is not None and np.linalg.cond(metric.g0) > max_cond:
            continue
        return Model(structure, metric)
    raise DegenerateProjection(f"no admissible model after {MAX_DRAWS} draws")


def random_transform(rng: np.random.Generator, ring: ScalarRing = ScalarRing.REAL, max_cond: float = 100.0) -> np.ndarray:
    """Random invertible matrix with condition number below ``max_cond``."""
    for _ in range(MAX_DRAWS):
        a = _uniform(rng, (DIM, DIM), ring) + np.eye(DIM)
        if np.linalg.cond(a) < max_cond:
            return a
    raise SingularTransform(f"no transform with cond < {max_cond} after {MAX_DRAWS} draws")
