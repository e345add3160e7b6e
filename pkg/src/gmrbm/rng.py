"""Deterministic named RNG streams.

Every random draw in the package flows through a Generator obtained from
``substream``.  Streams are keyed by one root seed plus a tuple of names or
indices, so components (training shuffles, chain pools, recall, synthetic
data) are independently reproducible: the same key always yields the same
stream, distinct keys yield statistically independent streams.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = 0xFFFF_FFFF_FFFF_FFFF


def substream(seed: int, *keys) -> np.random.Generator:
    """PCG64 generator keyed by (seed, *keys); keys are strings or ints."""
    entropy = [int(seed) & _MASK64]
    for k in keys:
        if isinstance(k, str):
            entropy.append(zlib.crc32(k.encode("utf-8")))
        else:
            entropy.append(int(k) & _MASK64)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
