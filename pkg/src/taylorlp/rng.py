"""Portable seeded random streams.

The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state
filled from four successive outputs of splitmix64 applied to the 64-bit seed.
Uniform doubles take the top 53 bits of each output, ``(x >> 11) * 2**-53``.
Gaussian draws use the basic Box-Muller transform on consecutive uniform
pairs ``(u1, u2)``: ``r = sqrt(-2 log(1 - u1))`` and the pair
``(r cos(2 pi u2), r sin(2 pi u2))``. A request for an odd count discards
the second member of the last pair, so every call consumes
``2 * ceil(n / 2)`` raw outputs.

Any language with 64-bit unsigned arithmetic and a libm can reproduce these
streams exactly.
"""

from __future__ import annotations

import numpy as np

from . import kernels

_MASK = 0xFFFF_FFFF_FFFF_FFFF


def splitmix64(x: int) -> tuple[int, int]:
    """Advance a splitmix64 state; return ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def seed_state(seed: int) -> np.ndarray:
    if not 0 <= seed <= _MASK:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    words = []
    x = seed
    for _ in range(4):
        x, out = splitmix64(x)
        words.append(out)
    return np.array(words, dtype=np.uint64)


class Xoshiro256:
    """xoshiro256** stream. Draws advance the state in place."""

    def __init__(self, seed: int = 0, *, backend: str | None = None):
        self.state = seed_state(int(seed))
        self._k = kernels.get_backend(backend)

    @classmethod
    def from_state(cls, state, *, backend: str | None = None) -> "Xoshiro256":
        obj = cls.__new__(cls)
        obj.state = np.array(state, dtype=np.uint64)
        obj._k = kernels.get_backend(backend)
        return obj

    def uint64(self, n: int) -> np.ndarray:
        return self._k.xoshiro_uint64(self.state, int(n))

    def uniform(self, n: int) -> np.ndarray:
        return self._k.xoshiro_uniform(self.state, int(n))

    def normal(self, n: int, loc: float = 0.0, scale: float = 1.0) -> np.ndarray:
        z = self._k.xoshiro_normal(self.state, int(n))
        if scale == 1.0 and loc == 0.0:
            return z
        return loc + scale * z
