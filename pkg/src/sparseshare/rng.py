"""Portable 64-bit PRNG: xoshiro256** seeded through splitmix64.

Outputs are reproducible across languages: a seed ``x`` expands to the
first four splitmix64 outputs starting from ``x``; doubles are
``(next() >> 11) * 2**-53``.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import kernels

MASK64 = (1 << 64) - 1


def splitmix64(seed: int, count: int) -> list[int]:
    x = seed & MASK64
    out = []
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


class Xoshiro256:
    """xoshiro256** generator with a single sequential stream."""

    def __init__(self, seed: int = 0, state=None):
        if state is not None:
            st = np.array(state, dtype=np.uint64)
            if st.shape != (4,) or not st.any():
                raise ValueError("state must be four uint64 words, not all zero")
            self.state = st
        else:
            self.state = np.array(splitmix64(int(seed), 4), dtype=np.uint64)

    def raw(self, count: int) -> np.ndarray:
        return kernels.xoshiro_raw(self.state, int(count))

    def next_u64(self) -> int:
        return int(self.raw(1)[0])

    def uniforms(self, count: int) -> np.ndarray:
        return kernels.xoshiro_uniforms(self.state, int(count))

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def exponential(self, rate: float) -> float:
        # 1 - u lies in (0, 1], so the log is finite
        return -math.log1p(-self.uniform()) / rate
