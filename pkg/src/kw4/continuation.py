"""Complex-scalar sweeps replaying the analytic continuation argument.

Battery ``a``: real J, real data, evaluated in complex arithmetic.
Battery ``b``: real J, complex data.
Battery ``c``: complex J = A J A^-1 with complex data compatible with it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjection
from .forms import PForm
from .jets import ScalarRing
from .rng import trial_rng
from .structures import (
    PARA_J,
    Model,
    Structure,
    StructureKind,
    kahler_form,
    pullback,
    random_model,
    random_transform,
    standard_structure,
)
from .weyl import lee_form, verify_kw

BATTERY_TOL = {"a": 1e-8, "b": 1e-8, "c": 1e-7}
MAX_CONJUGATIONS = 20


@dataclass(frozen=True)
class TrialRecord:
    battery: str
    trial: int
    residual: float
    passed: bool
    real_residual: float | None = None


def continuation_model(battery: str, rng: np.random.Generator) -> tuple[Model, Model | None]:
    """Draw one model for the battery; battery ``a`` also returns its real twin."""
    real_s = standard_structure(StructureKind.PARA)
    if battery == "a":
        m = random_model(rng, StructureKind.PARA)
        return m.astype(ScalarRing.COMPLEX), m
    if battery == "b":
        return random_model(rng, StructureKind.PARA, ring=ScalarRing.COMPLEX, structure=real_s), None
    if battery == "c":
        for _ in range(MAX_CONJUGATIONS):
            a = random_transform(rng, ScalarRing.COMPLEX, max_cond=100.0)
            s = Structure(StructureKind.PARA, a @ PARA_J @ np.linalg.inv(a))
            try:
                return random_model(rng, StructureKind.PARA, ring=ScalarRing.COMPLEX, structure=s), None
            except DegenerateProjection:
                continue
        raise DegenerateProjection("no admissible conjugated structure")
    raise ValueError(f"unknown battery {battery!r}")


def continuation_trial(battery: str, seed: int, trial: int, tol: float | None = None) -> TrialRecord:
    tol = BATTERY_TOL[battery] if tol is None else tol
    m, twin = continuation_model(battery, trial_rng(seed, trial, battery))
    residual = verify_kw(m, tol).residual
    real_residual = verify_kw(twin, tol).residual if twin is not None else None
    return TrialRecord(battery, trial, residual, residual <= tol, real_residual)


def continuation_trials(seed: int, count: int, batteries=("a", "b", "c")) -> list[TrialRecord]:
    return [continuation_trial(b, seed, t) for b in batteries for t in range(count)]


def hermitian_reduction_check(m: Model) -> dict[str, float]:
    """Deviations of the identities relating a complex-kind model to ``J+ = i J-``.

    Keys: ``j_square`` (J+^2 = Id), ``trace``, ``anti_isometry`` (J+*g = -g on
    every slot), ``kahler`` (Omega- = -i Omega+), ``lee`` (phi_J- = phi_J+),
    and ``max``.
    """
    if m.kind is not StructureKind.COMPLEX:
        raise ValueError("hermitian_reduction_check needs a complex-kind model")
    mc = m.astype(ScalarRing.COMPLEX)
    jp = 1j * mc.J
    eye = np.eye(4)
    g0, g1 = mc.metric.g0, mc.metric.g1
    out = {
        "j_square": float(np.max(np.abs(jp @ jp - eye))),
        "trace": float(abs(np.trace(jp))),
        "anti_isometry": float(
            max(np.max(np.abs(pullback(jp, g0) + g0)), np.max(np.abs(pullback(jp, g1) + g1)))
        ),
    }
    para = Model(Structure(StructureKind.PARA, jp), mc.metric)
    omega_minus: PForm = kahler_form(mc)
    omega_plus: PForm = kahler_form(para)
    out["kahler"] = float(np.max(np.abs(omega_minus.coeffs + 1j * omega_plus.coeffs)))
    out["lee"] = float(np.max(np.abs(lee_form(mc).phi - lee_form(para).phi)))
    out["max"] = max(out.values())
    return out
