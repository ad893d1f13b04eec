"""Monte-Carlo fault campaigns and fault-free consistency sweeps.

Every run draws its input (and its fault plan) from a stream seeded by
``derive_run_seed(seed, run_index)``. Runs can therefore be split across any
number of workers and aggregated by integer addition without changing the
result.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import _backend
from ._pykernels import FUNCTIONS, MODELS, TYPES, simulate_run
from .activations import ActivationKind
from .faults import FaultSpec
from .rng import MASK64
from .series import SeriesSettings

DEFAULT_SEED = 42
DEFAULT_RUNS = 1000

# term count and round-off threshold per function
DEFAULT_SETTINGS = {
    ActivationKind.EXPO: (30, 1e-14),
    ActivationKind.SIGMOID: (30, 1e-14),
    ActivationKind.TANH: (40, 1e-15),
}


class ConfigError(ValueError):
    """Invalid campaign configuration; ``flag`` names the offending parameter."""

    def __init__(self, flag: str, message: str):
        super().__init__(message)
        self.flag = flag


def default_settings(kind: ActivationKind) -> SeriesSettings:
    if kind not in DEFAULT_SETTINGS:
        raise ConfigError("function", f"{kind.value} has no series settings")
    terms, eps = DEFAULT_SETTINGS[kind]
    return SeriesSettings(terms, eps)


@dataclass(frozen=True)
class CampaignConfig:
    function: ActivationKind
    settings: SeriesSettings
    fault: FaultSpec | None = None
    runs: int = DEFAULT_RUNS
    input_lo: float = -3.0
    input_hi: float = 3.0
    seed: int = DEFAULT_SEED
    # undetected runs whose output moved by at most this much count as benign;
    # None means the function's epsilon
    benign_threshold: float | None = None

    def __post_init__(self):
        if self.function not in DEFAULT_SETTINGS:
            raise ConfigError("function", "campaigns cover expo, sigmoid and tanh")
        if self.runs < 1:
            raise ConfigError("runs", "runs must be ≥ 1")
        if not self.input_lo < self.input_hi:
            raise ConfigError("lo", "input_lo must be < input_hi")
        if self.fault is not None and self.fault.n > self.settings.term_count:
            raise ConfigError(
                "n", f"n ({self.fault.n}) exceeds the number of terms ({self.settings.term_count})"
            )
        if self.benign_threshold is not None and not self.benign_threshold >= 0:
            raise ConfigError("benign-threshold", "benign threshold must be ≥ 0")

    @property
    def benign(self) -> float:
        if self.benign_threshold is None:
            return self.settings.epsilon
        return self.benign_threshold


class Classification(Enum):
    DETECTED = "Detected"
    BENIGN_MISS = "BenignMiss"
    SILENT_CORRUPTION = "SilentCorruption"


_CLASSES = [Classification.DETECTED, Classification.BENIGN_MISS, Classification.SILENT_CORRUPTION]


@dataclass(frozen=True)
class RunOutcome:
    run_index: int
    x: float
    residual: float
    output_deviation: float
    classification: Classification

    @property
    def detected(self) -> bool:
        return self.classification is Classification.DETECTED


@dataclass(frozen=True)
class CampaignStats:
    runs: int
    detected_count: int
    benign_count: int
    silent_count: int

    def __post_init__(self):
        if self.detected_count + self.benign_count + self.silent_count != self.runs:
            raise ValueError("run counts do not partition the campaign")

    @property
    def detection_ratio(self) -> float:
        return self.detected_count / self.runs

    @property
    def effective_detection_ratio(self) -> float:
        """Detected share of the runs whose fault moved the output beyond the benign threshold."""
        effective = self.detected_count + self.silent_count
        return self.detected_count / effective if effective else 1.0

    @property
    def consistency_ratio(self) -> float:
        """Share of runs that passed the check; meaningful for fault-free campaigns."""
        return (self.runs - self.detected_count) / self.runs


@dataclass(frozen=True)
class ConsistencyCell:
    function: ActivationKind
    terms: int
    epsilon: float
    runs: int
    seed: int
    flagged: int

    @property
    def consistency_ratio(self) -> float:
        return (self.runs - self.flagged) / self.runs

    @property
    def stats(self) -> CampaignStats:
        return CampaignStats(self.runs, self.flagged, self.runs - self.flagged, 0)


def _kernel_args(cfg: CampaignConfig) -> tuple:
    f = cfg.fault
    s = cfg.settings
    model = MODELS.index(f.model) if f is not None else -1
    itype = TYPES.index(f.injection_type) if f is not None else 0
    return (
        FUNCTIONS.index(cfg.function), s.term_count, s.epsilon, cfg.benign, model, itype,
        f.n if f else 0, f.m if f else 1, cfg.input_lo, cfg.input_hi, s.clip_lo, s.clip_hi,
        cfg.seed & MASK64,
    )


def _count_chunk(cfg: CampaignConfig, start: int, stop: int, backend: str) -> tuple[int, int, int]:
    args = _kernel_args(cfg)
    if cfg.fault is None:
        residuals = np.empty(stop - start)
        func, n_terms, eps = args[0], args[1], args[2]
        _backend.kernels_for(backend).fault_free_residuals(
            func, n_terms, *args[8:13], start, stop, residuals
        )
        flagged = int(np.count_nonzero(~(residuals <= eps)))
        return flagged, stop - start - flagged, 0
    return tuple(_backend.kernels_for(backend).detection_counts(*args, start, stop))


def _chunks(runs: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, runs))
    edges = [runs * p // parts for p in range(parts + 1)]
    return [(edges[p], edges[p + 1]) for p in range(parts) if edges[p] < edges[p + 1]]


def _resolve_backend(backend: str | None) -> str:
    return _backend.BACKEND if backend is None else backend


def run_campaigns(
    configs: Sequence[CampaignConfig], workers: int = 1, backend: str | None = None
) -> list[CampaignStats]:
    """Run several campaigns, splitting every one into per-worker run ranges."""
    if workers < 1:
        raise ConfigError("workers", "workers must be ≥ 1")
    backend = _resolve_backend(backend)
    jobs = [(ci, start, stop) for ci, cfg in enumerate(configs) for start, stop in _chunks(cfg.runs, workers)]
    totals = [[0, 0, 0] for _ in configs]
    if workers == 1:
        results = [_count_chunk(configs[ci], a, b, backend) for ci, a, b in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    _count_chunk,
                    [configs[ci] for ci, _, _ in jobs],
                    [a for _, a, _ in jobs],
                    [b for _, _, b in jobs],
                    [backend] * len(jobs),
                )
            )
    for (ci, _, _), counts in zip(jobs, results):
        for k in range(3):
            totals[ci][k] += counts[k]
    return [CampaignStats(cfg.runs, *t) for cfg, t in zip(configs, totals)]


def run_detection_campaign(
    cfg: CampaignConfig, workers: int = 1, backend: str | None = None
) -> CampaignStats:
    if cfg.fault is None:
        raise ConfigError("model", "a detection campaign needs a fault specification")
    return run_campaigns([cfg], workers, backend)[0]


def run_fault_free(cfg: CampaignConfig, workers: int = 1, backend: str | None = None) -> CampaignStats:
    """Campaign without injection; ``detected_count`` counts false positives."""
    if cfg.fault is not None:
        cfg = CampaignConfig(cfg.function, cfg.settings, None, cfg.runs, cfg.input_lo,
                             cfg.input_hi, cfg.seed, cfg.benign_threshold)
    return run_campaigns([cfg], workers, backend)[0]


def trace_campaign(cfg: CampaignConfig, runs: Iterable[int] | None = None) -> list[RunOutcome]:
    """Per-run outcomes from the Python reference path (slow; for inspection)."""
    args = _kernel_args(cfg)
    indices = range(cfg.runs) if runs is None else runs
    out = []
    for i in indices:
        x, residual, deviation, code = simulate_run(*args, i)
        out.append(RunOutcome(i, x, residual, deviation, _CLASSES[code]))
    return out


def parse_term_range(spec: str) -> range:
    try:
        lo_s, hi_s = spec.split(":")
        lo, hi = int(lo_s), int(hi_s)
    except ValueError:
        raise ConfigError("terms", f"expected a range like 5:50, got {spec!r}") from None
    if lo < 1 or hi < lo:
        raise ConfigError("terms", f"term range {spec!r} is empty or inverted")
    return range(lo, hi + 1)


def run_consistency_sweep(
    function: ActivationKind,
    term_range: Iterable[int],
    epsilons: Sequence[float],
    runs: int = DEFAULT_RUNS,
    seed: int = DEFAULT_SEED,
    input_lo: float = -3.0,
    input_hi: float = 3.0,
    workers: int = 1,
    backend: str | None = None,
) -> list[ConsistencyCell]:
    """Fault-free false-positive grid over term counts and thresholds.

    All cells share the same inputs (run ``i`` always sees the same x), so for
    a fixed term count the ratio can only grow with epsilon.
    """
    term_range = list(term_range)
    if not term_range:
        raise ConfigError("terms", "term range is empty")
    if not epsilons:
        raise ConfigError("epsilons", "at least one epsilon is required")
    for eps in epsilons:
        if not eps > 0:
            raise ConfigError("epsilons", f"epsilon must be > 0, got {eps!r}")
    if runs < 1:
        raise ConfigError("runs", "runs must be ≥ 1")
    if workers < 1:
        raise ConfigError("workers", "workers must be ≥ 1")
    backend = _resolve_backend(backend)
    func = FUNCTIONS.index(function)
    s = SeriesSettings(term_range[0], min(epsilons))
    jobs = [(n, a, b) for n in term_range for a, b in _chunks(runs, workers)]

    def args(job):
        n, a, b = job
        return (backend, func, n, input_lo, input_hi, s.clip_lo, s.clip_hi, seed & MASK64, a, b)

    if workers == 1:
        parts = [_residual_chunk(*args(j)) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_residual_chunk_packed, [args(j) for j in jobs]))
    residuals: dict[int, list[np.ndarray]] = {n: [] for n in term_range}
    for (n, _, _), part in zip(jobs, parts):
        residuals[n].append(part)
    cells = []
    for n in term_range:
        r = np.concatenate(residuals[n])
        for eps in epsilons:
            flagged = int(np.count_nonzero(~(r <= eps)))
            cells.append(ConsistencyCell(function, n, eps, runs, seed, flagged))
    return cells


def _residual_chunk(backend, func, n, lo, hi, clip_lo, clip_hi, seed, start, stop) -> np.ndarray:
    out = np.empty(stop - start)
    _backend.kernels_for(backend).fault_free_residuals(func, n, lo, hi, clip_lo, clip_hi, seed, start, stop, out)
    return out


def _residual_chunk_packed(args) -> np.ndarray:
    return _residual_chunk(*args)
