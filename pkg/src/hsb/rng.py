"""Deterministic seeded randomness for sign sampling.

All randomness in this package comes from one documented generator so that
any implementation can reproduce a stream from its seed alone:

    output[i] = mix64(seed + (i + 1) * GAMMA)   for i = 0, 1, 2, ...

where all arithmetic is modulo 2^64, GAMMA = 0x9E3779B97F4A7C15, and mix64 is
the finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

(the classic splitmix64 step).  Because output[i] is a closed form in i, any
slice of the stream can be produced independently, which keeps batch sampling
cheap and worker-count independent.

Random sign assignments consume exactly one 64-bit word per rectangle, in
canonical rectangle-id order: sign r is -1 when bit 0 of output[r] is set,
else +1.  Sample t of a multi-sample run uses words [t*m, (t+1)*m) of the
stream, where m is the number of rectangles.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential view of the stream defined in the module docstring."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._k = 0

    def next64(self) -> int:
        self._k += 1
        return mix64((self.seed + self._k * GAMMA) & MASK64)


def stream64(seed: int, start: int, count: int) -> np.ndarray:
    """Words [start, start+count) of the stream for `seed`, as uint64."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & MASK64) + idx * np.uint64(GAMMA))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return z


def sign_values(seed: int, count: int, sample: int = 0) -> np.ndarray:
    """`count` signs (+1/-1, int8) for sample index `sample` of a run.

    Sample t uses stream words [t*count, (t+1)*count), one word per sign,
    bit 0 deciding: set -> -1, clear -> +1.
    """
    words = stream64(seed, sample * count, count)
    bits = (words & np.uint64(1)).astype(np.int8)
    return (1 - 2 * bits).astype(np.int8)
