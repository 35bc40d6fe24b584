"""Deterministic 64-bit LCG used for every seeded sampling decision.

state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64),
output = top 32 bits.  The constants are fixed so subset sampling is
identical across languages and platforms; nothing in the package uses any
other randomness source.
"""

from __future__ import annotations

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg:
    """Seeded deterministic random stream."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u32(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & _MASK
        return (self.state >> 32) & 0xFFFFFFFF

    def next_below(self, n: int) -> int:
        """Uniform-ish value in [0, n); the modulo bias is irrelevant at
        desk scale and keeps the stream portable."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u32() % n

    def sample(self, seq, k: int) -> list:
        """k distinct items by partial Fisher-Yates over indices."""
        n = len(seq)
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} of {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.next_below(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return [seq[idx[i]] for i in range(k)]

    def fraction(self) -> float:
        """Float in [0, 1) with 32 bits of state; for thresholds only."""
        return self.next_u32() / 2.0 ** 32
