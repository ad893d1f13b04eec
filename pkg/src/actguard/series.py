"""Maclaurin terms of the exponential, computed once and shared.

``SeriesContext.terms[k]`` holds ``x**k / k!`` as produced by the recurrence
``T[k] = T[k-1] * x / k``. The stored value is the definition; nothing
downstream recomputes a term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

CLIP_LO = -3.0
CLIP_HI = 3.0


class Sign(Enum):
    POSITIVE = 1
    NEGATIVE = -1


@dataclass(frozen=True)
class SeriesSettings:
    term_count: int
    epsilon: float
    clip_lo: float = CLIP_LO
    clip_hi: float = CLIP_HI

    def __post_init__(self):
        if self.term_count < 1:
            raise ValueError("term_count must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not self.clip_lo < self.clip_hi:
            raise ValueError("clip_lo must be < clip_hi")


@dataclass(frozen=True)
class SeriesContext:
    x: float
    terms: tuple[float, ...] = field(repr=False)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a series context needs at least one term")

    @property
    def term_count(self) -> int:
        return len(self.terms)

    def replace_terms(self, terms) -> "SeriesContext":
        terms = tuple(terms)
        if len(terms) != len(self.terms):
            raise ValueError("term count must not change")
        return SeriesContext(self.x, terms)


def clip_by_value(x: float, lo: float = CLIP_LO, hi: float = CLIP_HI) -> float:
    if not lo < hi:
        raise ValueError("lo must be < hi")
    if x != x:
        return x
    return min(max(x, lo), hi)


def maclaurin_terms(x: float, n: int) -> SeriesContext:
    if n < 1:
        raise ValueError("n must be >= 1")
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    terms = [1.0]
    t = 1.0
    for k in range(1, n):
        t = t * x / k
        terms.append(t)
    return SeriesContext(x, tuple(terms))


def sum_exp(ctx: SeriesContext, sign: Sign = Sign.POSITIVE) -> float:
    """Ascending-order sum of the cached terms: e^x, or e^-x with alternating signs."""
    s = 0.0
    if sign is Sign.POSITIVE:
        for t in ctx.terms:
            s += t
    else:
        for k, t in enumerate(ctx.terms):
            if k & 1:
                s -= t
            else:
                s += t
    return s
