"""Portable seeded pseudo-random generator used by the simulator.

Traces must be reproducible bit-for-bit from (algorithm, seed, stream) alone,
so the generator is pinned to a fully specified algorithm rather than to any
library default that may drift between versions:

* integers: PCG32 (XSH-RR variant, 64-bit state / 32-bit output),
* doubles: 53-bit uniforms built from two consecutive 32-bit draws,
* gaussians: Box-Muller on uniform pairs, second value cached.

The algorithm tag recorded in trace metadata is ``pcg32-boxmuller``.
"""

from __future__ import annotations

import math

import numpy as np

ALGORITHM = "pcg32-boxmuller"

_MASK64 = (1 << 64) - 1
_MULT = 6364136223846793005


class Pcg32:
    """PCG32 with Box-Muller gaussians.

    ``stream`` selects one of 2**63 independent sequences for the same seed;
    grid studies use it to give each cell its own deterministic stream.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._inc = ((self.stream << 1) | 1) & _MASK64
        self._state = 0
        self.next_uint32()
        self._state = (self._state + self.seed) & _MASK64
        self.next_uint32()
        self._spare: float | None = None

    def next_uint32(self) -> int:
        old = self._state
        self._state = (old * _MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits (two 32-bit draws)."""
        hi = self.next_uint32() >> 5   # 27 bits
        lo = self.next_uint32() >> 6   # 26 bits
        return (hi * 67108864.0 + lo) * (1.0 / 9007199254740992.0)

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return mu + sigma * z
        u1 = self.random()
        u2 = self.random()
        r = math.sqrt(-2.0 * math.log(1.0 - u1))  # 1-u1 in (0,1], log finite
        z0 = r * math.cos(2.0 * math.pi * u2)
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return mu + sigma * z0

    def normals(self, n: int, mu: float = 0.0, sigma: float = 1.0) -> np.ndarray:
        out = np.empty(n)
        for i in range(n):
            out[i] = self.normal(mu, sigma)
        return out
