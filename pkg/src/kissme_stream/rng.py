"""Self-contained pseudo-random generator for reproducible streams.

The synthetic generators must produce identical instance sequences for a
given 64-bit seed on any platform and any library version, so they do not
use numpy's or the interpreter's RNG. This module implements the
xoshiro256** generator (Blackman & Vigna) seeded through splitmix64, with
doubles drawn from the top 53 bits and normals via the Box-Muller
transform. All of it is fixed, documented arithmetic on 64-bit words.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi
_INV_2_53 = 1.0 / (1 << 53)


class Xoshiro256StarStar:
    """xoshiro256** stream seeded from a single 64-bit integer.

    Two instances created with the same seed yield the same sequence of
    draws, provided the calls are made in the same order.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "_spare_normal")

    def __init__(self, seed: int) -> None:
        z = seed & _MASK64
        state = []
        for _ in range(4):
            # splitmix64: recommended seeding sequence for xoshiro state
            z = (z + 0x9E3779B97F4A7C15) & _MASK64
            w = z
            w = ((w ^ (w >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            w = ((w ^ (w >> 27)) * 0x94D049BB133111EB) & _MASK64
            state.append(w ^ (w >> 31))
        if not any(state):
            state[0] = 1  # the all-zero state is the one invalid state
        self._s0, self._s1, self._s2, self._s3 = state
        self._spare_normal: float | None = None

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_uint64() >> 11) * _INV_2_53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). Bias is below 2**-53 per draw."""
        if n <= 0:
            raise ValueError("randint requires n >= 1")
        value = int(self.random() * n)
        return n - 1 if value >= n else value

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian draw via Box-Muller; the second value of each pair is cached."""
        spare = self._spare_normal
        if spare is not None:
            self._spare_normal = None
            return mu + sigma * spare
        u1 = 1.0 - self.random()  # in (0, 1], keeps the log finite
        u2 = self.random()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = _TWO_PI * u2
        self._spare_normal = radius * math.sin(angle)
        return mu + sigma * radius * math.cos(angle)
