"""Seeded random streams.

Every stochastic routine draws from ``numpy.random.Philox``, a counter-based
generator.  A stream is identified by a base seed and an integer key path;
``stream(seed, 3, 1)`` is the stream for replicate 3, purpose 1.  Keys are
mapped through ``SeedSequence(seed, spawn_key=key)``, so streams are
independent of the order in which they are requested and of how work is
scheduled across processes.
"""
from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit integer seed for the sub-stream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
