"""SplitMix64 random numbers with documented per-replica streams.

The simulator needs runs that replay bit-identically from a seed, in both the
pure-Python and the compiled backend. SplitMix64 is trivial to implement
identically in both, and splitting lets every replica own an independent
stream derived from (seed, stream_id):

    state_0 = mix64(seed XOR mix64((stream_id + 1) * GOLDEN))

Stream 0 is the default single-run stream; replica k of a multi-replica run
uses stream k.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijective scramble."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_stream(seed: int, stream: int) -> int:
    """Initial generator state for a numbered stream of a master seed."""
    return mix64((seed & _MASK) ^ mix64(((stream + 1) * GOLDEN) & _MASK))


class SplitMix64:
    """Sequential SplitMix64 generator over a 64-bit state."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & _MASK
        return mix64(self.state)

    def next_double(self) -> float:
        # 53 uniform bits in [0, 1)
        return (self.next_u64() >> 11) * 2.0 ** -53

    def exponential(self, rate: float) -> float:
        # -log1p(-u) maps u in [0,1) to [0, inf) without ever taking log(0)
        import math

        return -math.log1p(-self.next_double()) / rate
