"""Counter-based randomness with fixed-point acceptance thresholds.

A stream key is derived from (seed, tag, step) and every random decision is a
hash of the key and the item (vertex label or edge endpoints).  Probabilities
never enter a float comparison: they are turned into an integer threshold T in
[0, 2^64] and a draw ``x`` accepts iff ``x < T``.
"""

from math import isqrt

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
PAIR = 0xD6E8FEB86659FD93

# stream tags keep unrelated decisions of the same step independent
TAG_VERTEX = 1
TAG_EDGE = 2
TAG_PART = 3
TAG_NONUNIFORM = 4
TAG_ROUTE = 5
TAG_LOCAL = 6
TAG_HARD = 7
TAG_GEN = 8


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def draw1(key: int, x: int) -> int:
    """Reference implementation of the compiled per-item draw."""
    return mix64(key + x * GOLDEN)


def draw2(key: int, x: int, y: int) -> int:
    inner = mix64((key ^ PAIR) + x * GOLDEN)
    return mix64(inner + y * GOLDEN)


def stream_key(seed: int, tag: int, step: int = 0) -> int:
    k = mix64(seed * GOLDEN + 0x632BE59BD9B4E019)
    k = mix64(k ^ (tag * 0xA0761D6478BD642F))
    return mix64(k + step * GOLDEN)


def sub_seed(seed: int, *parts: int) -> int:
    """Derive an independent 63-bit seed for nested generators."""
    k = mix64(seed * GOLDEN + 0x1F83D9ABFB41BD6B)
    for p in parts:
        k = mix64(k ^ ((p * GOLDEN) & MASK64))
    return k >> 1


def threshold_ratio(num: int, den: int) -> int:
    """Threshold for probability num/den (clamped to [0, 1])."""
    if den <= 0:
        raise ValueError("denominator must be positive")
    if num <= 0:
        return 0
    return min(1 << 64, (num << 64) // den)


def threshold_inv_sqrt(num: int, den: int = 1) -> int:
    """Threshold for probability sqrt(den/num), i.e. 1/sqrt(num/den)."""
    if num <= 0:
        return 1 << 64
    return min(1 << 64, isqrt((den << 128) // num))


def as_tm1(threshold: int) -> np.uint64:
    """Encode threshold T as T-1 so that ``draw <= tm1`` means ``draw < T``.

    A zero threshold is clamped to 1 (probability 2^-64) since callers only ask
    for strictly positive probabilities.
    """
    t = max(1, min(threshold, 1 << 64))
    return np.uint64(t - 1)


def threshold_prob(threshold: int) -> float:
    return threshold / float(1 << 64)
