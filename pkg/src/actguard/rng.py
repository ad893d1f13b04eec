"""Counter-based random streams with per-run seed derivation.

Both the Python campaign loop and the compiled kernel consume the exact same
SplitMix64 sequence, so a campaign's statistics do not depend on which backend
ran it or how runs were split across workers.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_TWO_NEG53 = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """Seed for run ``run_index`` of a campaign; injective in ``run_index``."""
    if run_index < 0:
        raise ValueError("run_index must be >= 0")
    base = mix64(master_seed & MASK64)
    return mix64(base + (run_index + 1) * GOLDEN_GAMMA)


class RandomStream:
    """SplitMix64 generator. Not thread-safe; one instance per run."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_NEG53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randbelow(self, k: int) -> int:
        """Integer in [0, k) by multiply-shift; bias is below k / 2**64."""
        return (self.next_u64() * k) >> 64

    def sample(self, population: int, count: int) -> list[int]:
        """``count`` distinct values from ``range(population)`` (partial Fisher-Yates)."""
        if not 0 <= count <= population:
            raise ValueError(f"cannot draw {count} distinct values from {population}")
        pool = list(range(population))
        for i in range(count):
            j = i + self.randbelow(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:count]
