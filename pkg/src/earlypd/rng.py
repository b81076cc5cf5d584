"""Deterministic random streams (STREAM_VERSION 1).

Every random choice in the pipeline is drawn from a SplitMix64 stream: 64-bit
state advanced by the golden-gamma constant, output run through the standard
two-multiply finalizer. The algorithm is pure integer arithmetic, so a given
seed yields the same draws on every platform and in every language that
implements it.

Streams are derived, never shared. ``derive_stream(seed, label)`` hashes the
text label with FNV-1a 64, XORs it into the root seed and mixes once, so each
consumer ("split", "generate", "mlp", "tree/7", ...) gets an independent
stream and adding a new consumer never perturbs existing ones.

Derivation map used by the pipeline:

    root seed -> "split"       stratified partition shuffles
              -> "generate"    synthetic cohort sampling
              -> "mlp"         weight init and epoch shuffles
              -> "tree/<i>"    bootstrap and feature draws for forest tree i
"""

from __future__ import annotations

import math

STREAM_VERSION = 1

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit hash of the UTF-8 encoding of ``text``."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


class SplitMix64:
    """SplitMix64 stream. State is a single 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1), 53 bits of precision."""
        return (self.next_u64() >> 11) / 9007199254740992.0

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection of the biased tail."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, iterating from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list:
        items = list(range(n))
        self.shuffle(items)
        return items

    def normal(self) -> float:
        """Standard normal via Box-Muller. Consumes two uniforms per call."""
        # u1 shifted into (0, 1] so log() is always finite
        u1 = ((self.next_u64() >> 11) + 1) / 9007199254740992.0
        u2 = (self.next_u64() >> 11) / 9007199254740992.0
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def truncated_normal(self, mean: float, sd: float, lo: float, hi: float,
                         max_rejects: int = 100) -> float:
        """Normal draw restricted to [lo, hi].

        Rejection sampling; after ``max_rejects`` failed draws the next draw
        is clamped to the boundary instead, so the call always terminates and
        consumes a bounded number of stream values.
        """
        for _ in range(max_rejects):
            x = mean + sd * self.normal()
            if lo <= x <= hi:
                return x
        x = mean + sd * self.normal()
        return min(max(x, lo), hi)


def derive_stream(seed: int, label: str) -> SplitMix64:
    """Independent child stream for (seed, label)."""
    child = SplitMix64(seed ^ fnv1a64(label))
    return SplitMix64(child.next_u64())
