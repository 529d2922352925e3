"""xorshift64* pseudo-random generator.

The update rule is fixed so random batteries reproduce across languages::

    x ^= x >> 12
    x ^= x << 25   (mod 2^64)
    x ^= x >> 27
    out = x * 0x2545F4914F6CDD1D  (mod 2^64)

Uniform doubles take the top 53 bits of ``out``; normals use Box-Muller on
pairs of uniforms (cosine branch only, one normal per pair).
"""

from __future__ import annotations

import math

import numpy as np

MASK = (1 << 64) - 1
MULTIPLIER = 0x2545F4914F6CDD1D


class Xorshift64Star:
    def __init__(self, seed: int) -> None:
        state = int(seed) & MASK
        # a zero state is a fixed point of the recursion
        self.state = state if state else 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.state = x
        return (x * MULTIPLIER) & MASK

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def standard_normal(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(int(n))])

    def integers(self, high: int) -> int:
        """Integer in [0, high) by multiply-shift on the top 32 bits."""
        return ((self.next_u64() >> 32) * int(high)) >> 32

    def spawn(self, key: int) -> "Xorshift64Star":
        """Independent stream derived from this generator's seed and a key."""
        mixed = (self.state ^ ((int(key) + 1) * 0x9E3779B97F4A7C15)) & MASK
        child = Xorshift64Star(mixed)
        for _ in range(4):
            child.next_u64()
        return child
