"""Portable seeded random numbers.

The generator is xorshift64* (Vigna, 2016), seeded through one round of
splitmix64 so that small or zero seeds still give a well mixed, nonzero
state.  Everything is done on Python integers masked to 64 bits, so a
stream is reproducible bit for bit in any language.

State transition, with ``x`` the 64-bit state::

    x ^= x >> 12
    x ^= (x << 25) mod 2**64
    x ^= x >> 27
    out = (x * 0x2545F4914F6CDD1D) mod 2**64

Seeding, with ``seed`` reduced mod 2**64::

    z = (seed + 0x9E3779B97F4A7C15) mod 2**64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    x = z ^ (z >> 31)            # replaced by 0x9E3779B97F4A7C15 if zero

Doubles in [0, 1) take the top 53 bits: ``(out >> 11) * 2**-53``.
Standard normals use the cosine branch of Box-Muller on two consecutive
doubles ``u1, u2``: ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)``.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MULT = 0x2545F4914F6CDD1D


def splitmix64(seed):
    z = (seed + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class XorShift64Star:
    """xorshift64* stream.  Not thread safe; give each consumer its own."""

    def __init__(self, seed=0):
        state = splitmix64(int(seed) & MASK64)
        self.state = state if state else _GOLDEN

    def next_u64(self):
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & MASK64

    def random(self):
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform(self, low, high, size):
        """``size`` doubles ``low + (high - low) * u`` as a float64 array."""
        u = np.array([self.random() for _ in range(size)], dtype=np.float64)
        return low + (high - low) * u

    def normal(self, size):
        out = np.empty(size, dtype=np.float64)
        for k in range(size):
            u1 = self.random()
            u2 = self.random()
            out[k] = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
        return out

    def randbelow(self, n):
        """Integer in [0, n) by floor(u * n); n must be below 2**53."""
        if n < 1:
            raise ValueError("n must be positive")
        return int(self.random() * n)
