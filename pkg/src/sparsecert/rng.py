"""Reproducible random streams.

Every random draw in the package comes from a Philox (counter-based) generator
keyed by ``(seed, purpose, *index)``.  Two calls with the same key always see
the same stream, no matter how work is scheduled across threads.
"""

from __future__ import annotations

import zlib

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def _purpose_code(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def substream(seed: int, purpose: str, *index: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, purpose, *index)``."""
    seed = check_seed(seed)
    words = [seed & 0xFFFFFFFF, seed >> 32, _purpose_code(purpose)]
    words.extend(int(i) for i in index)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))
