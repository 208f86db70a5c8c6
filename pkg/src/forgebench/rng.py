"""Pinned deterministic random primitives: FNV-1a, SplitMix64, xoshiro256++.

Every random draw in the harness flows through these generators so that a
run is reproducible bit-for-bit from its global seed, independent of
platform, process count, or processing order.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# SplitMix64 increment, also used as the frame-index mixing multiplier.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_U53_INV = 2.0**-53


def fnv1a64(data: str | bytes) -> int:
    """64-bit FNV-1a over the UTF-8 bytes of `data`."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET_BASIS
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def splitmix64_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (advanced state, output)."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """One-shot SplitMix64 scramble of a 64-bit value."""
    return splitmix64_next(x & MASK64)[1]


class Xoshiro256pp:
    """xoshiro256++ generator, state seeded by four SplitMix64 draws."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        state = seed & MASK64
        state, self.s0 = splitmix64_next(state)
        state, self.s1 = splitmix64_next(state)
        state, self.s2 = splitmix64_next(state)
        state, self.s3 = splitmix64_next(state)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s0 + s3) & MASK64
        result = (((x << 23) | (x >> 41)) + s0) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self.s0, self.s1, self.s2 = s0, s1, s2
        self.s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        return result & MASK64

    def uniform(self) -> float:
        """Uniform double in (0, 1] from the top 53 bits of one draw."""
        return ((self.next_u64() >> 11) + 1) * _U53_INV
