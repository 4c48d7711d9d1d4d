"""Seedable, splittable 64-bit generator used by every simulation.

The generator is splitmix64 (Steele, Lea, Flood 2014).  It was chosen over
numpy's Generator objects because the identical integer recurrence runs
inside numba kernels, in the pure-python fallback, and here, producing
bit-identical streams on every path.  Streams derived via :func:`derive_seed`
are what "splittable" means throughout: child streams are statistically
independent and reproducible from (base_seed, index).

Every experiment artifact records ``GENERATOR_VERSION`` next to its seed.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15

GENERATOR_VERSION = "splitmix64-v1"


def mix64(z: int) -> int:
    """The splitmix64 output finalizer on a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Derive the state of child stream `index` from a base seed.

    This is the split operation: kernels receive the derived 64-bit state
    and iterate splitmix64 from there.
    """
    return mix64((base_seed & MASK64) ^ mix64((index + 1) * _GAMMA))


class SplitMix64:
    """Stateful splitmix64 stream over python ints (masked to 64 bits)."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def next_below(self, n: int) -> int:
        """Uniform draw from 0..n-1 (modulo reduction; bias < n/2**64)."""
        return self.next_u64() % n

    def next_bool(self, threshold_u64: int) -> bool:
        """True with probability threshold_u64 / 2**64."""
        return self.next_u64() < threshold_u64

    def split(self, index: int) -> "SplitMix64":
        return SplitMix64(derive_seed(self.state, index))


def probability_threshold_u64(num: int, den: int) -> int:
    """Largest u64 threshold t with t/2**64 <= num/den.

    Used to turn a rational acceptance probability into a single u64
    comparison; the rounding error is below 2**-64 per draw.
    """
    if den <= 0 or not 0 <= num <= den:
        raise ValueError(f"need 0 <= num <= den, got {num}/{den}")
    return (num << 64) // den if num < den else MASK64
