"""Kahler-Weyl verification engine for 4-dimensional (para-)Hermitian geometry.

The engine works with 1-jets of metrics at the origin of R^4 over real or
complex scalars, computes the Lee form ``phi`` from the codifferential of the
Kahler form and checks that the Weyl connection ``nabla^phi`` parallelizes J.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import KW4Error  # noqa: E402
from .forms import PForm, VolumeElement, codifferential_2form, exterior_derivative, hodge_star, wedge  # noqa: E402
from .jets import Jet1, JetMatrix, MetricJet, ScalarRing  # noqa: E402
from .structures import (  # noqa: E402
    Model,
    Structure,
    StructureKind,
    conformal_rescale,
    gl4_action,
    kahler_form,
    nijenhuis,
    project_compatible,
    random_model,
    standard_models,
)
from .weyl import lee_form, levi_civita, nabla_J, uniqueness_rank, verify_kw, weyl_connection  # noqa: E402

__all__ = [
    "Jet1",
    "JetMatrix",
    "KW4Error",
    "MetricJet",
    "Model",
    "PForm",
    "ScalarRing",
    "Structure",
    "StructureKind",
    "VolumeElement",
    "codifferential_2form",
    "conformal_rescale",
    "exterior_derivative",
    "gl4_action",
    "hodge_star",
    "kahler_form",
    "lee_form",
    "levi_civita",
    "nabla_J",
    "nijenhuis",
    "project_compatible",
    "random_model",
    "standard_models",
    "uniqueness_rank",
    "verify_kw",
    "wedge",
    "weyl_connection",
]
