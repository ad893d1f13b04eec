"""End-to-end acceptance checks, one test per criterion.

Each test records a single PASS/FAIL line (shown in the terminal summary) and
then asserts, so a failing criterion is visible both ways.
"""
import math
import time

import mpmath
import numpy as np
import pytest

from actguard import _backend, cli
from actguard import softfloat as sf
from actguard.activations import (
    CHECKS,
    ActivationKind,
    SERIES_FUNCTIONS,
    negation_skipped_output,
    relu_baseline,
    relu_protected,
    series_argument,
)
from actguard.campaign import (
    DEFAULT_SETTINGS,
    CampaignConfig,
    default_settings,
    run_campaigns,
    run_consistency_sweep,
    run_fault_free,
)
from actguard.rng import RandomStream, derive_run_seed
from actguard.series import Sign, maclaurin_terms, sum_exp

from reference_tables import TABLES
from test_softfloat import _oracle_check

SEED = 42
RUNS = 1000
BAND = 2.5  # percentage points
SERIES = list(SERIES_FUNCTIONS)


# 1


def test_consistency_at_default_settings(report):
    start = time.perf_counter()
    stats = {k: run_fault_free(CampaignConfig(k, default_settings(k), None, RUNS, seed=SEED)) for k in SERIES}
    elapsed = time.perf_counter() - start
    ratios = {k.value: s.consistency_ratio for k, s in stats.items()}
    ok = all(r == 1.0 for r in ratios.values()) and elapsed < 1.0
    detail = ", ".join(f"{name} {r:.3f}" for name, r in ratios.items()) + f"; {elapsed:.2f} s"
    report(1, "fault-free consistency", ok, detail)
    assert ok, detail


# 2 to 4


def _table_report(table: str):
    start = time.perf_counter()
    pairs = cli.table_configs(table, RUNS, SEED)
    stats = run_campaigns([c for c, _ in pairs])
    elapsed = time.perf_counter() - start
    ref = TABLES[table]
    inside = inside_effective = 0
    worst = (0.0, None)
    lines = []
    for (cfg, m), s in zip(pairs, stats):
        expected = ref[(cfg.fault.model.value, cfg.fault.n, m)][SERIES.index(cfg.function)]
        got = 100 * s.detection_ratio
        eff = 100 * s.effective_detection_ratio
        gap = abs(got - expected)
        inside += gap <= BAND
        inside_effective += abs(eff - expected) <= BAND
        if gap > worst[0]:
            worst = (gap, f"{cfg.fault.model.value} n={cfg.fault.n} m={m} {cfg.function.value}")
        lines.append(f"  {cfg.fault.model.value:8} n={cfg.fault.n} m={m!s:4} {cfg.function.value:8}"
                     f" expected {expected:5.1f} got {got:5.1f} (benign excluded {eff:5.1f})")
    print("\n".join(lines))
    return len(pairs), inside, inside_effective, worst, elapsed


@pytest.mark.parametrize(
    "number, table, title",
    [(2, "random", "random-injection table"), (3, "burst", "burst-injection table"),
     (4, "skip_random", "skip and total-random table")],
)
def test_detection_tables(report, number, table, title):
    cells, inside, inside_effective, worst, elapsed = _table_report(table)
    ok = inside == cells and elapsed < 60
    detail = (f"{inside}/{cells} cells within ±{BAND} points; worst gap {worst[0]:.1f} ({worst[1]}); "
              f"{inside_effective}/{cells} within band if benign misses are excluded; {elapsed:.2f} s")
    report(number, title, ok, detail)
    assert ok, detail


# 5


def test_attack_soundness(report):
    rng = RandomStream(derive_run_seed(SEED, 0))
    misses = {"sigmoid": 0, "tanh": 0, "relu forced zero": 0, "relu fault-free": 0}
    trials = 0
    while trials < RUNS:
        x = rng.uniform(-3.0, 3.0)
        if abs(x) <= 1e-3:
            continue
        trials += 1
        for kind in (ActivationKind.SIGMOID, ActivationKind.TANH):
            terms, eps = DEFAULT_SETTINGS[kind]
            ctx = maclaurin_terms(series_argument(kind, x), terms)
            if not CHECKS[kind](ctx, negation_skipped_output(kind, ctx), eps).detected:
                misses[kind.value] += 1
        xp = abs(x)
        if not relu_protected(xp, 0.0).detected:
            misses["relu forced zero"] += 1
        if relu_protected(x, relu_baseline(x)).detected:
            misses["relu fault-free"] += 1
    ok = not any(misses.values())
    detail = f"{trials} inputs; misses " + ", ".join(f"{k} {v}" for k, v in misses.items())
    report(5, "negation-skip and forced-zero attacks", ok, detail)
    assert ok, detail


# 6


def _ulps(a: float, b: float) -> float:
    return 0.0 if a == b else abs(a - b) / math.ulp(max(abs(a), abs(b)))


def test_numerical_invariants(report):
    mpmath.mp.dps = 50
    xs = np.linspace(-3.0, 3.0, 241)
    failures = []

    worst_rec = 0.0
    for x in xs:
        ctx = maclaurin_terms(float(x), 51)
        for k, t in enumerate(ctx.terms):
            ref = float(mpmath.mpf(float(x)) ** k / mpmath.factorial(k))
            if ref != 0.0:
                worst_rec = max(worst_rec, abs(t - ref) / math.ulp(ref))
    if worst_rec > 2:
        failures.append(f"recurrence vs direct {worst_rec:.0f} ulp (limit 2)")

    worst_cache = 0.0
    for x in xs:
        for n in range(5, 51):
            worst_cache = max(worst_cache, _ulps(sum_exp(maclaurin_terms(float(x), n), Sign.NEGATIVE),
                                                 sum_exp(maclaurin_terms(float(-x), n), Sign.POSITIVE)))
    if worst_cache > 4:
        failures.append(f"cached alternating sum {worst_cache:.0f} ulp (limit 4)")

    worst_trunc = max(abs(sum_exp(maclaurin_terms(float(x), 30)) - float(mpmath.exp(float(x)))) for x in xs)
    if worst_trunc > 1e-14:
        failures.append(f"truncation {worst_trunc:.1e} (limit 1e-14)")

    rng = np.random.default_rng(SEED)
    relu_bad = sum(relu_baseline(v) + relu_baseline(-v) != abs(v)
                   for v in rng.normal(0, 1e3, 10_000).tolist() + [0.0, -0.0, 5e-324, 1.7e308])
    if relu_bad:
        failures.append(f"relu identity broken on {relu_bad} inputs")

    configs = [c for t in TABLES for c, _ in cli.table_configs(t, 200, SEED)]
    partition_bad = sum(s.detected_count + s.benign_count + s.silent_count != s.runs
                        for s in run_campaigns(configs))
    if partition_bad:
        failures.append(f"partition broken in {partition_bad} campaigns")

    eps = [1e-17, 1e-16, 1e-15, 1e-14, 1e-13, 1e-12, 1e-10]
    mono_bad = 0
    for kind in SERIES:
        cells = run_consistency_sweep(kind, range(5, 51), eps, runs=RUNS, seed=SEED)
        for n in range(5, 51):
            row = [c.consistency_ratio for c in cells if c.terms == n]
            mono_bad += row != sorted(row)
    if mono_bad:
        failures.append(f"epsilon monotonicity broken in {mono_bad} rows")

    ok = not failures
    detail = (f"recurrence {worst_rec:.0f} ulp, caching {worst_cache:.0f} ulp, truncation {worst_trunc:.1e}, "
              f"{len(configs)} campaigns partitioned, monotonicity over 3x46 rows"
              + ("" if ok else "; failed: " + "; ".join(failures)))
    report(6, "numerical invariants", ok, detail)
    assert ok, detail


# 7


@pytest.mark.skipif(_backend.BACKEND != "compiled", reason="needs the compiled kernels for speed")
def test_softfloat_oracle(report):
    start = time.perf_counter()
    ops = _oracle_check(1_000_000, SEED)
    worst_nr = 0.0
    for i in range(1 << 16):
        d_sig = (1 << 23) | (i << 7)
        r = sf.nr_reciprocal_fixed(d_sig & sf.FRAC_MASK)
        worst_nr = max(worst_nr, abs(r * d_sig - (1 << 84)) / (1 << 84))
    elapsed = time.perf_counter() - start
    ok = all(w <= 1 for w, _ in ops.values()) and worst_nr < 2.0 ** -24 and elapsed < 30
    detail = (", ".join(f"{op} max {w} ulp ({100 * e:.2f}% exact)" for op, (w, e) in ops.items())
              + f"; reciprocal rel. error {worst_nr:.2e} (2^-24 = {2.0 ** -24:.2e}); {elapsed:.1f} s")
    report(7, "binary32 datapath vs native", ok, detail)
    assert ok, detail


# 8


def test_reproduce_tables_is_deterministic(report, tmp_path):
    dirs = {name: tmp_path / name for name in ("first", "second", "workers8")}
    for name, path in dirs.items():
        argv = ["reproduce-tables", "--seed", str(SEED), "--out-dir", str(path)]
        if name == "workers8":
            argv += ["--workers", "8"]
        assert cli.main(argv) == 0
    files = sorted(p.name for p in dirs["first"].iterdir())
    differing = [f for f in files
                 if not (dirs["first"] / f).read_bytes() == (dirs["second"] / f).read_bytes()
                 == (dirs["workers8"] / f).read_bytes()]
    ok = len(files) == 3 and not differing
    detail = f"{len(files)} files compared across 3 runs; differing: {differing or 'none'}"
    report(8, "reproduce-tables determinism", ok, detail)
    assert ok, detail
