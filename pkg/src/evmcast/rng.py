"""Reference pseudo-random generator used everywhere a seed appears.

SplitMix64 with the canonical constants, so that seeded runs are
bit-identical across platforms and reimplementations:

    s <- s + 0x9E3779B97F4A7C15            (mod 2^64)
    z <- s
    z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB
    output: z ^ (z >> 31)

Uniforms take the top 53 bits: u = (z >> 11) * 2**-53, so u is in [0, 1).
"""
from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Stateful 64-bit generator; one instance per logical stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def floats(self, n: int) -> list[float]:
        return [self.next_float() for _ in range(n)]


def derive_seed(root: int, index: int) -> int:
    """Deterministic child seed: the index-th output of a stream seeded
    with `root`. Keeps fold/replicate seeds decorrelated."""
    gen = SplitMix64(root)
    value = gen.next_u64()
    for _ in range(index):
        value = gen.next_u64()
    return value
