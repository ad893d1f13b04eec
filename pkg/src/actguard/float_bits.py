"""Bit-level view of IEEE-754 binary64 values.

Bit 0 is the least-significant significand bit, bit 63 is the sign bit.
Patterns are plain Python ints in ``[0, 2**64)``; they print as 16 hex digits.
"""
from __future__ import annotations

import struct
from typing import Iterable, NamedTuple

MASK64 = (1 << 64) - 1
SIGN_BIT = 63
EXP_SHIFT = 52
EXP_MASK = 0x7FF
FRAC_MASK = (1 << 52) - 1

_pack = struct.Struct("<d").pack
_unpack = struct.Struct("<d").unpack
_pack_q = struct.Struct("<Q").pack
_unpack_q = struct.Struct("<Q").unpack


def to_bits(x: float) -> int:
    return _unpack_q(_pack(x))[0]


def from_bits(raw: int) -> float:
    return _unpack(_pack_q(raw & MASK64))[0]


def hex64(raw: int) -> str:
    return f"{raw & MASK64:016x}"


class FloatWord(NamedTuple):
    """A binary64 pattern split into its three fields."""

    sign: int
    exponent: int
    significand: int

    @classmethod
    def decompose(cls, raw: int) -> "FloatWord":
        raw &= MASK64
        return cls(raw >> SIGN_BIT, (raw >> EXP_SHIFT) & EXP_MASK, raw & FRAC_MASK)

    @classmethod
    def from_float(cls, x: float) -> "FloatWord":
        return cls.decompose(to_bits(x))

    @property
    def raw(self) -> int:
        return (self.sign << SIGN_BIT) | (self.exponent << EXP_SHIFT) | self.significand

    def compose(self) -> int:
        return self.raw

    @property
    def value(self) -> float:
        return from_bits(self.raw)


def bit_mask(bits: Iterable[int]) -> int:
    """OR together ``1 << b`` for every index, rejecting anything outside [0, 63]."""
    mask = 0
    for b in bits:
        if not 0 <= b <= 63:
            raise ValueError(f"bit index {b} outside [0, 63]")
        mask |= 1 << b
    return mask


def flip_bits(raw: int, bits: Iterable[int]) -> int:
    return (raw ^ bit_mask(bits)) & MASK64


def stuck_at(raw: int, bits: Iterable[int], level: int) -> int:
    mask = bit_mask(bits)
    if level == 1:
        return (raw | mask) & MASK64
    if level == 0:
        return raw & ~mask & MASK64
    raise ValueError(f"stuck-at level must be 0 or 1, got {level!r}")


def is_finite_pattern(raw: int) -> bool:
    return ((raw >> EXP_SHIFT) & EXP_MASK) != EXP_MASK


def random_finite(rng) -> int:
    """Uniform 64-bit pattern conditioned on encoding a finite double.

    Resamples up to 64 times; after that the exponent's top bit is cleared,
    which can never leave an all-ones exponent.
    """
    raw = 0
    for _ in range(64):
        raw = rng.next_u64()
        if is_finite_pattern(raw):
            return raw
    return raw & ~(1 << 62)
