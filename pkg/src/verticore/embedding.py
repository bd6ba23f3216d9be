"""Deterministic text embedding.

Hashed character trigrams over a fixed 64-bucket table, L2-normalized.
No model weights, no platform-dependent hashing: the same string embeds
to bit-identical floats everywhere, which is what makes retrieval
rankings and event-log replay exactly reproducible. A learned encoder
can replace this behind the same signature.
"""

from __future__ import annotations

import math

DIM = 64

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

ZERO_VECTOR: tuple[float, ...] = (0.0,) * DIM


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def embed(text: str) -> tuple[float, ...]:
    """Embed text as a unit vector of hashed-trigram counts.

    Text is lowercased first; anything shorter than one trigram maps to
    the all-zero vector.
    """
    lowered = text.lower()
    if len(lowered) < 3:
        return ZERO_VECTOR
    counts = [0] * DIM
    for i in range(len(lowered) - 2):
        tri = lowered[i : i + 3]
        counts[fnv1a_64(tri.encode("utf-8")) % DIM] += 1
    norm = math.sqrt(sum(c * c for c in counts))
    return tuple(c / norm for c in counts)


def cosine(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    """Cosine score between two embedding vectors, clamped to [-1, 1].

    Vectors from embed() are unit or zero, so the dot product is the
    cosine; the clamp absorbs float rounding at the boundaries. A zero
    vector scores 0.0 against everything.
    """
    dot = sum(x * y for x, y in zip(a, b))
    if dot > 1.0:
        return 1.0
    if dot < -1.0:
        return -1.0
    return dot
