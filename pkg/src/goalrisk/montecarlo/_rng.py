"""Counter-based deterministic random stream.

Every (seed, sample index, coin index) triple maps to one uniform draw in
[0, 1) through a stateless chain of 64-bit finalizer hashes:

    base = mix64(seed xor GOLDEN)
    key  = mix64(base xor sample_index * STREAM_MULT)
    bits = mix64(key xor coin_index * COIN_MULT)
    u    = (bits >> 11) * 2**-53

``mix64`` is the murmur3 64-bit finalizer.  Because the draw depends only
on the triple, any partition of the sample range over workers reproduces
identical draws, and the same arithmetic runs bit-identically in pure
Python, vectorized numpy, and the compiled kernel.

A coin with probability p fires when u < p.  Since u = m * 2**-53 with m
an integer and ceil(p * 2**53) is computed exactly for p in [0, 1], the
comparison is equivalent to the integer test m < ceil(p * 2**53), which is
what the batch kernels use.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_MULT = 0xBF58476D1CE4E5B9
COIN_MULT = 0x94D049BB133111EB
_SCALE = 2.0**-53


def mix64(z: int) -> int:
    """Murmur3 64-bit finalizer: a bijective avalanche on 64-bit words."""
    z &= _MASK
    z ^= z >> 33
    z = (z * 0xFF51AFD7ED558CCD) & _MASK
    z ^= z >> 33
    z = (z * 0xC4CEB9FE1A85EC53) & _MASK
    z ^= z >> 33
    return z


def stream_base(seed: int) -> int:
    return mix64((seed ^ GOLDEN) & _MASK)


def sample_key(base: int, sample_index: int) -> int:
    return mix64(base ^ ((sample_index * STREAM_MULT) & _MASK))


def coin_bits(key: int, coin_index: int) -> int:
    return mix64(key ^ ((coin_index * COIN_MULT) & _MASK))


def probability_threshold(p: float) -> int:
    """Integer threshold t with (bits >> 11) < t  iff  uniform < p."""
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return 1 << 53
    return math.ceil(p * (1 << 53))


class CounterStream:
    """Uniform draws for one (seed, sample index) pair, addressed by coin."""

    __slots__ = ("_key",)

    def __init__(self, seed: int, sample_index: int):
        self._key = sample_key(stream_base(seed), sample_index)

    def uniform(self, coin_index: int) -> float:
        """Uniform float in [0, 1) for the given coin, with 53 random bits."""
        return (coin_bits(self._key, coin_index) >> 11) * _SCALE
