"""Shared hypothesis strategies and random-model helpers for the test suite."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from kw4.jets import ScalarRing
from kw4.structures import StructureKind, random_model

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)
RINGS = st.sampled_from([ScalarRing.REAL, ScalarRing.COMPLEX])
#: (kind, signature) combinations with a Kahler-Weyl structure
CASES = [
    (StructureKind.PARA, (2, 2)),
    (StructureKind.COMPLEX, (2, 2)),
    (StructureKind.COMPLEX, (0, 4)),
]


def rng_of(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def uniform(rng: np.random.Generator, shape, ring: ScalarRing = ScalarRing.REAL) -> np.ndarray:
    x = rng.uniform(-1, 1, shape)
    if ring is ScalarRing.COMPLEX:
        x = x + 1j * rng.uniform(-1, 1, shape)
    return x


@st.composite
def models(draw, rings=RINGS):
    kind, sig = draw(st.sampled_from(CASES))
    ring = draw(rings)
    return random_model(rng_of(draw(SEEDS)), kind, sig, ring)
