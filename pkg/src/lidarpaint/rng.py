"""Deterministic, splittable random streams.

Every randomized stage derives its generator from a 64-bit seed plus a
stream path (integers or strings such as frame ids). The generator is
NumPy's Philox counter-based engine keyed by ``(seed, fold(path))``, so a
stream depends only on its path, never on scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash (stable across platforms and runs)."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fold_stream(*parts) -> int:
    """Mix stream-path components (ints or strings) into one 64-bit word."""
    acc = _splitmix64(len(parts) & _MASK64)
    for part in parts:
        if isinstance(part, str):
            word = fnv1a64(part.encode("utf-8"))
        else:
            word = int(part) & _MASK64
        acc = _splitmix64(acc ^ word)
    return acc


def make_rng(seed: int, *stream) -> np.random.Generator:
    """Generator for the stream identified by (seed, *stream).

    Same arguments always yield the same draw sequence; distinct stream
    paths yield statistically independent sequences.
    """
    key = np.array([int(seed) & _MASK64, fold_stream(*stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
