"""Per-trial random streams.

Every trial draws from its own PCG64 generator seeded through
``numpy.random.SeedSequence`` with entropy ``[seed, trial, tag]``, so a sweep
gives the same records regardless of worker count or trial order.
"""

from __future__ import annotations

import zlib

import numpy as np

RNG_NAME = "numpy PCG64 / SeedSequence(entropy=[seed, trial, crc32(tag)])"


def trial_rng(seed: int, trial: int, tag: str = "") -> np.random.Generator:
    entropy = [int(seed), int(trial), zlib.crc32(tag.encode())]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
