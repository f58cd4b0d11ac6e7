"""Deterministic, named random streams.

Each subsystem draws from its own stream so that enabling or reordering one
subsystem cannot perturb another's draws across runs with the same seed.
"""

from __future__ import annotations

import numpy as np

# Fixed registry: stream identity must never depend on Python's salted hash().
_STREAMS = {
    "launch": 1,
    "mobility": 2,
    "failures": 3,
    "traffic": 4,
}


def seeded_rng(seed: int, stream_id: str) -> np.random.Generator:
    """Independent PCG64 generator for (seed, stream_id)."""
    try:
        stream = _STREAMS[stream_id]
    except KeyError:
        raise ValueError(f"unknown RNG stream {stream_id!r}; known: {sorted(_STREAMS)}")
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, stream])
    return np.random.Generator(np.random.PCG64(ss))
