"""Offline text embedding: hashed character trigrams, L2-normalized.

Deterministic across processes (crc32, not the salted builtin hash) so the
candidate prefilter ranking is reproducible with no model downloads.
"""

from __future__ import annotations

import math
import zlib

DIM = 256


def trigram_embed(text: str, dim: int = DIM) -> list[float]:
    vec = [0.0] * dim
    if not text:
        return vec
    padded = f" {text} "
    for i in range(len(padded) - 2):
        tri = padded[i : i + 3]
        vec[zlib.crc32(tri.encode("utf-8")) % dim] += 1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm > 0:
        vec = [v / norm for v in vec]
    return vec


def dot(a: list[float], b: list[float]) -> float:
    return sum(x * y for x, y in zip(a, b))
