"""Fault plans and their application to cached term registers.

A fault corrupts ``terms[k]`` after it has been computed and before any sum
reads it, so both the activation and its checker see the same corruption.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import float_bits as fb
from .rng import RandomStream
from .series import SeriesContext


class FaultModel(Enum):
    BIT_FLIP = "bitflip"
    STUCK_AT_0 = "stuck0"
    STUCK_AT_1 = "stuck1"
    SKIP = "skip"
    TOTAL_RANDOM = "random"

    @property
    def term_level(self) -> bool:
        """True for models that replace the whole term and ignore bit selection."""
        return self in (FaultModel.SKIP, FaultModel.TOTAL_RANDOM)


class InjectionType(Enum):
    RANDOM = "random"
    BURST = "burst"


@dataclass(frozen=True)
class FaultSpec:
    model: FaultModel
    injection_type: InjectionType = InjectionType.RANDOM
    n: int = 1
    m: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be ≥ 1")
        if not 1 <= self.m <= 64:
            raise ValueError("m must be in [1, 64]")

    def validate_for(self, term_count: int) -> None:
        if self.n > term_count:
            raise ValueError(f"n ({self.n}) exceeds the number of terms ({term_count})")


@dataclass(frozen=True)
class FaultPlan:
    # (term index, bit indices); bit tuple empty for term-level models
    targets: tuple[tuple[int, tuple[int, ...]], ...]

    @property
    def term_indices(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.targets)


def burst_bits(start: int, m: int) -> tuple[int, ...]:
    """``m`` consecutive bits upward from ``start``, cut off at the sign bit."""
    return tuple(range(start, min(start + m, 64)))


def plan_faults(spec: FaultSpec, term_count: int, rng: RandomStream) -> FaultPlan:
    spec.validate_for(term_count)
    indices = rng.sample(term_count, spec.n)
    targets = []
    for k in indices:
        if spec.model.term_level:
            bits: tuple[int, ...] = ()
        elif spec.injection_type is InjectionType.RANDOM:
            bits = tuple(rng.sample(64, spec.m))
        else:
            bits = burst_bits(rng.randbelow(64), spec.m)
        targets.append((k, bits))
    return FaultPlan(tuple(targets))


def corrupt_term(value: float, bits, model: FaultModel, rng: RandomStream) -> float:
    if model is FaultModel.SKIP:
        return 0.0
    if model is FaultModel.TOTAL_RANDOM:
        return fb.from_bits(fb.random_finite(rng))
    raw = fb.to_bits(value)
    if model is FaultModel.BIT_FLIP:
        raw = fb.flip_bits(raw, bits)
    elif model is FaultModel.STUCK_AT_1:
        raw = fb.stuck_at(raw, bits, 1)
    else:
        raw = fb.stuck_at(raw, bits, 0)
    return fb.from_bits(raw)


def apply_fault(
    ctx: SeriesContext, plan: FaultPlan, model: FaultModel, rng: RandomStream
) -> SeriesContext:
    terms = list(ctx.terms)
    for k, bits in plan.targets:
        if not 0 <= k < len(terms):
            raise ValueError(f"term index {k} outside the context")
        terms[k] = corrupt_term(terms[k], bits, model, rng)
    return ctx.replace_terms(terms)
