"""Pure-Python kernels: the reference the compiled ``_ckernels`` must reproduce bit for bit.

Integer codes follow the declaration order of the enums:
functions EXPO=0, SIGMOID=1, TANH=2; models BIT_FLIP=0, STUCK_AT_0=1,
STUCK_AT_1=2, SKIP=3, TOTAL_RANDOM=4; injection types RANDOM=0, BURST=1.
"""
from __future__ import annotations

from . import softfloat as sf
from .activations import SERIES_FUNCTIONS, ActivationKind, series_argument
from .faults import FaultModel, FaultSpec, InjectionType, apply_fault, plan_faults
from .rng import RandomStream, derive_run_seed
from .series import clip_by_value, maclaurin_terms

FUNCTIONS = [ActivationKind.EXPO, ActivationKind.SIGMOID, ActivationKind.TANH]
MODELS = list(FaultModel)
TYPES = list(InjectionType)

INF = float("inf")

DETECTED, BENIGN, SILENT = 0, 1, 2


def simulate_run(func, n_terms, eps, benign, model, itype, n_faults, m,
                 lo, hi, clip_lo, clip_hi, seed, run_index):
    """One run; returns (x, residual, deviation, class code)."""
    kind = FUNCTIONS[func]
    _, protected = SERIES_FUNCTIONS[kind]
    rng = RandomStream(derive_run_seed(seed, run_index))
    x = clip_by_value(rng.uniform(lo, hi), clip_lo, clip_hi)
    ctx = maclaurin_terms(series_argument(kind, x), n_terms)
    clean = protected(ctx, eps)
    if model < 0:
        result = clean
    else:
        spec = FaultSpec(MODELS[model], TYPES[itype], n_faults, m)
        plan = plan_faults(spec, n_terms, rng)
        result = protected(apply_fault(ctx, plan, spec.model, rng), eps)
    deviation = abs(result.value - clean.value)
    if deviation != deviation:
        deviation = INF
    if not result.residual <= eps:
        code = DETECTED
    elif deviation <= benign:
        code = BENIGN
    else:
        code = SILENT
    return x, result.residual, deviation, code


def detection_counts(func, n_terms, eps, benign, model, itype, n_faults, m,
                     lo, hi, clip_lo, clip_hi, seed, start, stop):
    counts = [0, 0, 0]
    for i in range(start, stop):
        code = simulate_run(func, n_terms, eps, benign, model, itype, n_faults, m,
                            lo, hi, clip_lo, clip_hi, seed, i)[3]
        counts[code] += 1
    return tuple(counts)


def fault_free_residuals(func, n_terms, lo, hi, clip_lo, clip_hi, seed, start, stop, out):
    kind = FUNCTIONS[func]
    _, protected = SERIES_FUNCTIONS[kind]
    for j, i in enumerate(range(start, stop)):
        rng = RandomStream(derive_run_seed(seed, i))
        x = clip_by_value(rng.uniform(lo, hi), clip_lo, clip_hi)
        out[j] = protected(maclaurin_terms(series_argument(kind, x), n_terms), 1.0).residual


def f32_mul_array(a, b, out):
    for i in range(len(a)):
        out[i] = sf.f32_mul(int(a[i]), int(b[i]))


def f32_addsub_array(a, b, out, subtract):
    for i in range(len(a)):
        out[i] = sf.f32_addsub(int(a[i]), int(b[i]), bool(subtract))


def f32_div_nr_array(a, b, out):
    for i in range(len(a)):
        out[i] = sf.f32_div_nr(int(a[i]), int(b[i]))


def nr_reciprocal_array(d, out):
    for i in range(len(d)):
        out[i] = sf.nr_reciprocal(int(d[i]))
