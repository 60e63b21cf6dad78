"""Portable seeded pseudorandom stream.

Every stochastic stage (phrase sampling, sample selection, stochastic
gestures, stimulus shuffling) draws from :class:`SplitMix64`.  The
generator is fully specified by its 64-bit state and three constants, so
identical seeds produce identical streams on every platform and Python
version, unlike ``random.Random`` whose seeding of non-integers and
float generation are implementation details.
"""

from __future__ import annotations

import hashlib
from typing import Sequence, TypeVar

T = TypeVar("T")

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer applied to a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_1) & MASK64
    z = ((z ^ (z >> 27)) * MIX_2) & MASK64
    return z ^ (z >> 31)


def stable_hash64(text: str) -> int:
    """64-bit hash of ``text`` that does not depend on ``PYTHONHASHSEED``."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, *path: object) -> int:
    """Child seed for an isolated sub-stream, e.g. ``derive_seed(s, "dof", "torso")``."""
    label = "/".join(str(p) for p in path)
    return mix64((seed & MASK64) ^ stable_hash64(label))


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014).

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    @classmethod
    def from_text(cls, text: str) -> "SplitMix64":
        return cls(stable_hash64(text))

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choice(self, seq: Sequence[T]) -> T:
        return seq[self.randbelow(len(seq))]

    def weighted_index(self, counts: Sequence[int]) -> int:
        """Index drawn with probability proportional to integer ``counts``."""
        total = sum(counts)
        if total <= 0:
            raise ValueError("counts must have a positive sum")
        r = self.randbelow(total)
        for i, c in enumerate(counts):
            if r < c:
                return i
            r -= c
        raise AssertionError("unreachable")

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
