"""Scenario files, per-trial dispatch and machine reports.

Scenario and report files are UTF-8 JSON.  Complex numbers are encoded as
``[re, im]`` pairs; tensors are nested row-major arrays.  See
``docs/report-schema.md``.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .continuation import BATTERY_TOL, continuation_trial
from .errors import KW4Error
from .golden import star_table, warped_check, warped_model
from .jets import DIM, MetricJet, ScalarRing
from .oracle import fd_oracle
from .rng import RNG_NAME, trial_rng
from .structures import (
    Model,
    Structure,
    StructureKind,
    conformal_rescale,
    gl4_action,
    parse_signature,
    project_compatible,
    pullback,
    random_model,
    random_symmetric,
    random_transform,
    standard_models,
    standard_structure,
)
from .weyl import (
    ANTI_INVARIANT_SPAN,
    kw_defect,
    lee_form,
    levi_civita,
    linearization_map,
    nabla_J,
    uniqueness_rank,
    verify_kw,
    weyl_connection,
)

SCHEMA = "kw4.report/1"
MODES = (
    "verify",
    "uniqueness",
    "linearization",
    "continuation",
    "star-table",
    "example-3-2",
    "oracle-compare",
    "gauge",
)
DEFAULT_TOLERANCE = {
    "verify": 1e-9,
    "uniqueness": 1e-8,
    "linearization": 1e-10,
    "continuation": None,  # per battery
    "star-table": 0.0,
    "example-3-2": 1e-12,
    "oracle-compare": 1e-6,
    "gauge": 1e-9,
}
_FIELDS = {
    "mode", "kind", "signature", "scalars", "g0", "g1", "J", "seed",
    "trials", "tolerance", "f", "flip_orientation",
}


class ScenarioError(KW4Error, ValueError):
    def __init__(self, message: str, line: int = 1):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# JSON encoding of scalars


def decode_tensor(value, shape: tuple[int, ...], name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape == shape:
        return arr
    if arr.shape == shape + (2,):
        return arr[..., 0] + 1j * arr[..., 1]
    raise ValueError(f"{name} must have shape {shape} (or {shape + (2,)} for complex)")


def encode(value):
    """JSON-ready form of numbers and arrays; complex entries become ``[re, im]``."""
    if isinstance(value, np.ndarray):
        return [encode(v) for v in value] if value.ndim else encode(value.item())
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        return {k: encode(v) for k, v in value.items()}
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


# ---------------------------------------------------------------------------
# scenarios


@dataclass
class Scenario:
    mode: str
    kind: StructureKind = StructureKind.PARA
    signature: tuple[int, int] = (2, 2)
    scalars: ScalarRing = ScalarRing.REAL
    seed: int = 0
    trials: int = 1
    tolerance: float | None = None
    g0: np.ndarray | None = None
    g1: np.ndarray | None = None
    J: np.ndarray | None = None
    f: tuple[float, float, float, float] | None = None
    flip_orientation: bool = False
    explicit_model: Model | None = field(default=None, repr=False, compare=False)

    @property
    def effective_tolerance(self) -> float | None:
        return self.tolerance if self.tolerance is not None else DEFAULT_TOLERANCE[self.mode]

    def to_json(self) -> dict:
        out = {
            "mode": self.mode,
            "kind": self.kind.value,
            "signature": list(self.signature),
            "scalars": self.scalars.value,
            "seed": self.seed,
            "trials": self.trials,
            "tolerance": self.tolerance,
        }
        for name in ("g0", "g1", "J", "f"):
            if getattr(self, name) is not None:
                out[name] = encode(np.asarray(getattr(self, name)))
        if self.flip_orientation:
            out["flip_orientation"] = True
        return out


def _line_of(text: str, key: str) -> int:
    pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for n, line in enumerate(text.splitlines(), start=1):
        if pat.search(line):
            return n
    return 1


def parse_scenario(text: str) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in raw:
        if key not in _FIELDS:
            raise ScenarioError(f"unknown field {key!r}", _line_of(text, key))
    key = "mode"
    try:
        if "mode" not in raw:
            raise ValueError("missing required field 'mode'")
        mode = raw["mode"]
        if mode not in MODES:
            raise ValueError(f"mode must be one of {', '.join(MODES)}")
        sc = Scenario(mode=mode)
        key = "kind"
        sc.kind = StructureKind(raw.get("kind", "para"))
        key = "signature"
        sc.signature = parse_signature(raw.get("signature", [2, 2]))
        if sc.kind is StructureKind.PARA and sc.signature != (2, 2):
            raise ValueError("para kind requires signature (2,2)")
        key = "scalars"
        sc.scalars = ScalarRing(raw.get("scalars", "real"))
        key = "seed"
        sc.seed = int(raw.get("seed", 0))
        if sc.seed < 0 or sc.seed != raw.get("seed", 0):
            raise ValueError("seed must be an unsigned integer")
        key = "trials"
        sc.trials = raw.get("trials", 1)
        if not isinstance(sc.trials, int) or sc.trials < 1:
            raise ValueError("trials must be a positive integer")
        key = "tolerance"
        tol = raw.get("tolerance")
        if tol is not None and not (isinstance(tol, (int, float)) and tol >= 0):
            raise ValueError("tolerance must be a non-negative number")
        sc.tolerance = None if tol is None else float(tol)
        key = "f"
        if "f" in raw:
            f = [float(x) for x in raw["f"]]
            if len(f) != 4:
                raise ValueError("f needs four components")
            sc.f = tuple(f)
        key = "flip_orientation"
        sc.flip_orientation = bool(raw.get("flip_orientation", False))
        key = "J"
        if "J" in raw:
            sc.J = decode_tensor(raw["J"], (DIM, DIM), "J")
        key = "g1"
        if "g1" in raw:
            sc.g1 = decode_tensor(raw["g1"], (DIM,) * 3, "g1")
        key = "g0"
        if "g0" in raw:
            sc.g0 = decode_tensor(raw["g0"], (DIM, DIM), "g0")
        elif sc.g1 is not None:
            raise ValueError("g1 given without g0")
        if sc.g0 is not None:
            structure = Structure(sc.kind, sc.J) if sc.J is not None else standard_structure(sc.kind)
            g1 = sc.g1 if sc.g1 is not None else np.zeros((DIM,) * 3)
            sc.explicit_model = Model(structure, project_compatible(sc.g0, g1, structure))
        elif sc.J is not None:
            Structure(sc.kind, sc.J)
    except (ValueError, TypeError, KW4Error) as exc:
        raise ScenarioError(str(exc), _line_of(text, key)) from None
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


# ---------------------------------------------------------------------------
# trials


def _model(sc: Scenario, rng: np.random.Generator) -> Model:
    if sc.explicit_model is not None:
        return sc.explicit_model.astype(sc.scalars) if sc.scalars is ScalarRing.COMPLEX else sc.explicit_model
    structure = Structure(sc.kind, sc.J) if sc.J is not None else None
    return random_model(rng, sc.kind, sc.signature, sc.scalars, structure=structure)


def _record(trial: int, residual: float | None, passed: bool, **extra) -> dict:
    rec = {"trial": trial, "residual": residual, "pass": bool(passed)}
    rec.update(extra)
    return rec


def run_trial(sc: Scenario, trial: int) -> dict:
    tol = sc.effective_tolerance
    rng = trial_rng(sc.seed, trial, sc.mode)
    mode = sc.mode

    if mode == "verify":
        r = verify_kw(_model(sc, rng), tol)
        return _record(trial, r.residual, r.passed, phi=r.phi.phi)

    if mode == "uniqueness":
        m = sc.explicit_model if sc.explicit_model is not None else standard_models(sc.kind, sc.signature)
        m = m.astype(sc.scalars)
        if trial > 0:
            m = gl4_action(random_transform(rng, sc.scalars), m)
        rank = uniqueness_rank(m)
        return _record(trial, None, rank == DIM, rank=rank)

    if mode == "linearization":
        s = standard_structure(StructureKind.PARA)
        if trial == 0:
            table = linearization_map(s, ANTI_INVARIANT_SPAN)
            residual = float(np.max(np.abs(table)))
        else:
            raw = [random_symmetric(rng, sc.scalars)[0] for _ in range(2)]
            eps = [0.5 * (r + s.kind.pullback_sign * pullback(s.J, r)) for r in raw]
            table = linearization_map(s, eps)
            # additivity on data that is not compatible, where the map does not vanish
            sym = [random_symmetric(rng, sc.scalars)[1][0] for _ in range(2)]
            parts = linearization_map(s, sym, validate=False)
            whole = linearization_map(s, [sym[0] + sym[1]], validate=False)
            additivity = float(np.max(np.abs(whole[0] - parts[0] - parts[1])))
            residual = max(float(np.max(np.abs(table))), additivity)
        return _record(trial, residual, residual <= tol)

    if mode == "continuation":
        battery = "abc"[trial // sc.trials]
        rec = continuation_trial(battery, sc.seed, trial % sc.trials, sc.tolerance)
        extra = {"battery": battery}
        if rec.real_residual is not None:
            extra["real_residual"] = rec.real_residual
            passed = rec.passed and rec.real_residual == rec.residual
        else:
            passed = rec.passed
        return _record(trial, rec.residual, passed, **extra)

    if mode == "star-table":
        rows = star_table(sc.flip_orientation)
        residual = max(r["deviation"] for r in rows)
        return _record(trial, residual, residual <= tol, rows=rows)

    if mode == "example-3-2":
        f = np.asarray(sc.f) if sc.f is not None and trial == 0 else rng.uniform(-1, 1, DIM)
        dev = warped_check(f)
        residual = max(dev.values())
        phi = lee_form(warped_model(f)).phi
        return _record(trial, residual, residual <= tol, f=f, phi=phi, deviations=dev)

    if mode == "oracle-compare":
        m = _model(sc, rng)
        o = fd_oracle(m)
        phi = lee_form(m)
        weyl = weyl_connection(m, phi)
        residual = float(
            max(
                np.max(np.abs(o.phi - phi.phi)),
                np.max(np.abs(o.gamma - levi_civita(m).gamma)),
                np.max(np.abs(o.weyl_gamma - weyl.gamma)),
                np.max(np.abs(o.nabla_J - nabla_J(weyl, m.structure).value)),
            )
        )
        return _record(trial, residual, residual <= tol)

    if mode == "gauge":
        m = _model(sc, rng)
        f0 = rng.uniform(-1, 1)
        df = rng.uniform(-1, 1, DIM)
        m2 = conformal_rescale(m, f0, df)
        phi, phi2 = lee_form(m), lee_form(m2)
        shift = float(np.max(np.abs(phi2.phi - (phi.phi - df))))
        conn = float(np.max(np.abs(weyl_connection(m2, phi2).gamma - weyl_connection(m, phi).gamma)))
        residual = max(shift, conn)
        return _record(trial, residual, residual <= tol, lee_shift=shift, connection=conn)

    raise ValueError(f"unknown mode {mode!r}")


def trial_count(sc: Scenario) -> int:
    if sc.mode == "star-table":
        return 1
    if sc.mode == "continuation":
        return 3 * sc.trials
    return sc.trials


def _run_chunk(args) -> list[dict]:
    sc, indices = args
    return [run_trial(sc, i) for i in indices]


def run_scenario(sc: Scenario, jobs: int = 1) -> dict:
    """Run every trial and assemble the machine report."""
    start = time.perf_counter()
    indices = list(range(trial_count(sc)))
    if jobs > 1 and len(indices) > 1:
        chunks = [indices[k::jobs] for k in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = [r for part in pool.map(_run_chunk, [(sc, c) for c in chunks]) for r in part]
    else:
        records = _run_chunk((sc, indices))
    records.sort(key=lambda r: r["trial"])
    residuals = [r["residual"] for r in records if r["residual"] is not None]
    summary = {
        "trials": len(records),
        "pass_count": sum(r["pass"] for r in records),
        "max_residual": max(residuals) if residuals else None,
        "all_pass": all(r["pass"] for r in records),
        "wall_time": time.perf_counter() - start,
    }
    tol = sc.effective_tolerance
    return {
        "schema": SCHEMA,
        "scenario": sc.to_json(),
        "records": encode(records),
        "summary": summary,
        "provenance": {
            "seed": sc.seed,
            "tolerance": tol if tol is not None else dict(BATTERY_TOL),
            "engine_version": __version__,
            "rng": RNG_NAME,
        },
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def strip_wall_time(report: dict) -> dict:
    out = json.loads(json.dumps(report))
    out["summary"].pop("wall_time", None)
    return out


def format_text(report: dict) -> str:
    """Human-readable summary of a report."""
    sc = report["scenario"]
    s = report["summary"]
    lines = [f"mode {sc['mode']}  kind {sc['kind']}  signature {tuple(sc['signature'])}  scalars {sc['scalars']}"]
    if sc["mode"] == "star-table":
        for row in report["records"][0]["rows"]:
            got = " + ".join(f"{v:+g} {k}" for k, v in row["computed"].items())
            lines.append(f"  *{row['form']:<9} = {got:<12} expected {row['expected']}")
    elif sc["mode"] == "example-3-2":
        rec = report["records"][0]
        f = rec["f"]
        phi = ", ".join(f"{x + 0.0:.6g}" for x in rec["phi"])
        lines.append(f"  f = ({', '.join(f'{x:g}' for x in f)})")
        lines.append(f"  phi(0) = ({phi})")
        lines.append(f"  residual = {rec['residual']:.3e}")
        if len(report["records"]) > 1:
            lines.append(f"  plus {len(report['records']) - 1} random draws")
    mr = s["max_residual"]
    lines.append(
        f"{s['pass_count']}/{s['trials']} trials pass"
        + (f", max residual {mr:.3e}" if mr is not None else "")
        + f", {s['wall_time']:.2f} s"
    )
    lines.append("PASS" if s["all_pass"] else "FAIL")
    return "\n".join(lines)
