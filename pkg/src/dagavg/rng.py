"""Deterministic random number generation.

All randomness in this package flows through a single splitmix64 stream so
that results are reproducible bit-for-bit from a base seed.  The generator
and the seed-derivation rule below are part of the package contract:

* stream output i (0-based) for seed ``s`` is ``finalize(s + (i+1)*GAMMA)``
  where ``GAMMA = 0x9E3779B97F4A7C15`` and ``finalize`` is the splitmix64
  output function (xor-shift/multiply scrambler),
* ``derive(base, i)`` producing sub-stream seeds equals stream output with
  index ``i - 1``, i.e. ``finalize(base + i*GAMMA)``,
* bounded draws are ``next() mod bound`` and unit draws are
  ``next() / 2**64``.

Because each output depends only on the seed and the counter, the stream can
be produced both one value at a time (:class:`Splitmix64`) and as a whole
numpy block (:func:`fill_uint64`); the two agree exactly.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def finalize(z: int) -> int:
    """Splitmix64 output scrambler for one 64-bit state word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4B9B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(base_seed: int, index: int) -> int:
    """Seed for sub-stream ``index`` of the stream seeded with ``base_seed``."""
    return finalize((base_seed + index * GAMMA) & MASK64)


class Splitmix64:
    """Sequential splitmix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + GAMMA) & MASK64
        return finalize(self._state)

    def next_below(self, bound: int) -> int:
        """Uniform-ish draw in [0, bound) via modulo; bias < bound / 2**64."""
        return self.next_uint64() % bound

    def next_unit(self) -> float:
        """Draw in [0, 1) with 64-bit resolution truncated to float64."""
        return self.next_uint64() / 2.0**64


def fill_uint64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of the stream seeded with ``seed``, vectorized."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    z = np.uint64(seed & MASK64) + idx * np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4B9B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def fill_unit(seed: int, n: int) -> np.ndarray:
    """First ``n`` unit-interval draws of the stream seeded with ``seed``."""
    return fill_uint64(seed, n) / 2.0**64
