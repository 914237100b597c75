"""Deterministic, platform-stable random number plumbing.

Entry draws use NumPy's Philox bit generator, a counter-based generator with
published round constants whose bit stream is covered by NumPy's stability
guarantee.  Keying ``Philox(key=seed)`` bypasses SeedSequence entropy mixing,
so the stream is a pure function of the 64-bit seed.  A double in [0, 1) is
the top 53 bits of one output word (``Generator.random(dtype=float64)``), and
entries are mapped to [-1, 1) as ``2*u53 - 1``; matrices fill row-major.

Per-trial substreams are derived from ``(master_seed, n, trial)`` with the
SplitMix64 finalizer (Steele-Lea-Flood constants), an avalanche mixer, so the
assignment is order-independent: any worker can compute any trial's stream
without sequential splitting.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

__all__ = ["mix64", "substream_seed", "seed_stream", "uniform_pm1_matrix"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 output function: a 64-bit avalanche mixer."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def substream_seed(master_seed: int, n: int, trial: int) -> int:
    """64-bit substream key for dimension ``n``, trial index ``trial``."""
    z = mix64(master_seed & _MASK64)
    z = mix64(z ^ (n & _MASK64))
    z = mix64(z ^ (trial & _MASK64))
    return z


def seed_stream(base: int) -> Iterator[int]:
    """Endless SplitMix64 sequence seeded at ``base`` (resampling seeds)."""
    state = base & _MASK64
    while True:
        yield mix64(state)
        state = (state + _GOLDEN) & _MASK64


def uniform_pm1_matrix(n: int, seed: int) -> np.ndarray:
    """An ``n x n`` matrix of i.i.d. uniform [-1, 1) entries, row-major,
    identical for identical ``(n, seed)`` on every platform."""
    gen = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    return 2.0 * gen.random((n, n), dtype=np.float64) - 1.0
