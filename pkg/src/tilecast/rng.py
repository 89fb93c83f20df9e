"""Deterministic keyed random streams.

Everything stochastic in this package (scene synthesis, the oracle
detector) draws from splitmix64 streams keyed on explicit integer
tuples, so results are bit-identical across runs, platforms, and
thread schedules. Normal deviates use a fixed Box-Muller rule on the
same streams.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Domain tags keep independent uses of the same seed from colliding.
DOMAIN_PIXEL = 0x01
DOMAIN_OBJECT = 0x02
DOMAIN_DETECT = 0x03
DOMAIN_FALSE_POSITIVE = 0x04


def mix64(x: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized mix64 over a uint64 array. Matches mix64 bit-for-bit."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


def stream_key(*parts: int) -> int:
    """Fold integer key parts into a 64-bit stream state."""
    state = 0
    for p in parts:
        state = mix64(state ^ mix64(p & _MASK64))
    return state


class Stream:
    """A splitmix64 sequence keyed on a tuple of integers."""

    __slots__ = ("_state",)

    def __init__(self, *key: int):
        self._state = stream_key(*key)

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        return self.next_u64() % n

    def normal_pair(self) -> tuple[float, float]:
        """Two independent unit normals via Box-Muller.

        The first uniform is mapped to (0, 1] so the log is finite.
        """
        u = ((self.next_u64() >> 11) + 1) * 2.0**-53
        v = (self.next_u64() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u))
        return r * math.cos(2.0 * math.pi * v), r * math.sin(2.0 * math.pi * v)

    def poisson(self, lam: float) -> int:
        """Poisson count by Knuth's product-of-uniforms method."""
        if lam < 0:
            raise ValueError("poisson() requires lam >= 0")
        if lam == 0:
            return 0
        limit = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            p *= self.uniform()
            if p <= limit:
                return k
            k += 1
