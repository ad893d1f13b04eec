"""Baseline and self-checking activation functions.

Each protected variant evaluates the activation from a shared
:class:`~actguard.series.SeriesContext`, maps the output back through an
inverse transform, and compares it with a second quantity built from the same
cached terms. A residual above ``epsilon`` (or any NaN) is a detected fault.

ReLU is checked by recomputation on the negated input instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .series import SeriesContext, Sign, sum_exp

INF = math.inf
NAN = math.nan


class Verdict(Enum):
    PASS = "Pass"
    FAULT_DETECTED = "FaultDetected"


class ActivationKind(Enum):
    EXPO = "expo"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    RELU = "relu"


@dataclass(frozen=True)
class ProtectedResult:
    value: float
    checker_value: float
    residual: float
    verdict: Verdict
    epsilon_used: float

    @property
    def detected(self) -> bool:
        return self.verdict is Verdict.FAULT_DETECTED


def ieee_div(a: float, b: float) -> float:
    """``a / b`` with IEEE-754 results for a zero divisor instead of an exception."""
    try:
        return a / b
    except ZeroDivisionError:
        if a != a or a == 0.0:
            return NAN
        return math.copysign(INF, a) * math.copysign(1.0, b)


def _verdict(residual: float, eps: float) -> Verdict:
    # written so that a NaN residual fails the comparison and is flagged
    if residual <= eps:
        return Verdict.PASS
    return Verdict.FAULT_DETECTED


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise ValueError("epsilon must be > 0")


def _result(value: float, checker: float, residual: float, eps: float) -> ProtectedResult:
    if value != value or checker != checker:
        residual = NAN
    return ProtectedResult(value, checker, residual, _verdict(residual, eps), eps)


def sigmoid_baseline(ctx: SeriesContext) -> float:
    return ieee_div(1.0, 1.0 + sum_exp(ctx, Sign.NEGATIVE))


def sigmoid_protected(ctx: SeriesContext, eps: float) -> ProtectedResult:
    return sigmoid_check(ctx, sigmoid_baseline(ctx), eps)


def sigmoid_check(ctx: SeriesContext, y: float, eps: float) -> ProtectedResult:
    """Check a sigmoid output ``y`` against e^x summed from the cached terms."""
    _check_eps(eps)
    checker = sum_exp(ctx, Sign.POSITIVE)
    residual = abs(ieee_div(y, 1.0 - y) - checker)
    return _result(y, checker, residual, eps)


def tanh_baseline(ctx2: SeriesContext) -> float:
    """tanh(x) from a context built at the doubled argument ``2x``."""
    e = sum_exp(ctx2, Sign.POSITIVE)
    return ieee_div(e - 1.0, e + 1.0)


def tanh_protected(ctx2: SeriesContext, eps: float) -> ProtectedResult:
    return tanh_check(ctx2, tanh_baseline(ctx2), eps)


def tanh_check(ctx2: SeriesContext, y: float, eps: float) -> ProtectedResult:
    _check_eps(eps)
    alpha = ieee_div(1.0 - y, 1.0 + y)
    h = ieee_div(alpha - 1.0, alpha + 1.0)
    e_neg = sum_exp(ctx2, Sign.NEGATIVE)
    checker = ieee_div(e_neg - 1.0, e_neg + 1.0)
    return _result(y, checker, abs(h - checker), eps)


def expo_baseline(ctx: SeriesContext) -> float:
    return sum_exp(ctx, Sign.POSITIVE)


def expo_protected(ctx: SeriesContext, eps: float) -> ProtectedResult:
    """e^x checked through e^x * e^-x == 1 on the same cached terms."""
    return expo_check(ctx, expo_baseline(ctx), eps)


def expo_check(ctx: SeriesContext, value: float, eps: float) -> ProtectedResult:
    _check_eps(eps)
    checker = sum_exp(ctx, Sign.NEGATIVE)
    return _result(value, checker, abs(value * checker - 1.0), eps)


def relu_baseline(x: float) -> float:
    return x if x > 0.0 else 0.0


def relu_protected(x: float, forward: float) -> ProtectedResult:
    """Check a claimed ``relu(x)`` output by adding ``relu(-x)`` to it.

    The pair sums to |x|, so it must be nonzero exactly when x is.
    ``residual`` carries the flag (0.0 or 1.0) and ``checker_value`` the sum.
    """
    total = forward + relu_baseline(-x)
    if (total != 0.0 and x != 0.0) or (total == 0.0 and x == 0.0):
        flag = 0.0
    else:
        flag = 1.0
    verdict = Verdict.FAULT_DETECTED if flag else Verdict.PASS
    # a 0/1 flag against 0.5 keeps "residual > epsilon_used" equal to the verdict
    return ProtectedResult(forward, total, flag, verdict, 0.5)


# baseline(ctx) and protected(ctx, eps) for the series-based kinds
SERIES_FUNCTIONS = {
    ActivationKind.EXPO: (expo_baseline, expo_protected),
    ActivationKind.SIGMOID: (sigmoid_baseline, sigmoid_protected),
    ActivationKind.TANH: (tanh_baseline, tanh_protected),
}


CHECKS = {
    ActivationKind.EXPO: expo_check,
    ActivationKind.SIGMOID: sigmoid_check,
    ActivationKind.TANH: tanh_check,
}


def negation_skipped_output(kind: ActivationKind, ctx: SeriesContext) -> float:
    """Output when the sign flip in the exponent is skipped (a laser-induced instruction skip).

    Sigmoid then evaluates ``1 / (1 + e^x)`` and tanh evaluates
    ``(e^-2x - 1) / (e^-2x + 1)``, both from the same cached terms.
    """
    if kind is ActivationKind.SIGMOID:
        return ieee_div(1.0, 1.0 + sum_exp(ctx, Sign.POSITIVE))
    if kind is ActivationKind.TANH:
        e = sum_exp(ctx, Sign.NEGATIVE)
        return ieee_div(e - 1.0, e + 1.0)
    raise ValueError(f"{kind.value} has no negation step")


def series_argument(kind: ActivationKind, x: float) -> float:
    """Argument the Maclaurin terms are built at: ``2x`` for tanh, ``x`` otherwise."""
    return 2.0 * x if kind is ActivationKind.TANH else x
