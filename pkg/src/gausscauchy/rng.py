"""Counter-based random streams: one independent generator per (seed, stream)."""

from __future__ import annotations

import numpy as np

__all__ = ["rng"]


def rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for replication/stream ``stream`` under ``seed``.

    The stream id enters the seed sequence's spawn key, so replication ``r``
    draws the same numbers no matter which worker runs it or in what order.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))
