"""Command-line front end.

Data goes to stdout (or ``--out``); progress and diagnostics go to stderr.
Exit status: 0 on success, 1 on I/O failure, 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import struct
import sys
from typing import Sequence

from . import softfloat as sf
from .activations import (
    CHECKS,
    SERIES_FUNCTIONS,
    ActivationKind,
    negation_skipped_output,
    relu_baseline,
    relu_protected,
    series_argument,
)
from .campaign import (
    DEFAULT_SEED,
    DEFAULT_SETTINGS,
    CampaignConfig,
    ConfigError,
    parse_term_range,
    run_campaigns,
    run_consistency_sweep,
)
from .faults import FaultModel, FaultSpec, InjectionType, apply_fault, plan_faults
from .rng import RandomStream, derive_run_seed
from .series import SeriesSettings, clip_by_value, maclaurin_terms

log = logging.getLogger("actguard")

COLUMNS = ["function", "model", "type", "n", "m", "terms", "epsilon", "runs", "seed",
           "detected", "benign", "silent", "ratio"]

SERIES_KINDS = [k.value for k in SERIES_FUNCTIONS]

# detection grids: (model, type, [(n, m), ...]); m is None for term-level models
BIT_MODELS = [FaultModel.BIT_FLIP, FaultModel.STUCK_AT_1, FaultModel.STUCK_AT_0]
TABLE_GRIDS = {
    "random": [(mdl, InjectionType.RANDOM, [(1, 1), (1, 5), (3, 1), (3, 5), (6, 1), (6, 5)])
               for mdl in BIT_MODELS],
    "burst": [(mdl, InjectionType.BURST, [(1, 2), (1, 5), (3, 2), (3, 5), (6, 2), (6, 5)])
              for mdl in BIT_MODELS],
    "skip_random": [(mdl, InjectionType.RANDOM, [(n, None) for n in range(1, 7)])
                    for mdl in (FaultModel.SKIP, FaultModel.TOTAL_RANDOM)],
}


class CliError(Exception):
    def __init__(self, flag: str | None, message: str, status: int = 2):
        super().__init__(message)
        self.flag = flag
        self.status = status

    def __str__(self) -> str:
        msg = super().__str__()
        return f"--{self.flag}: {msg}" if self.flag else msg


# parsing helpers


def _float_flag(flag: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise CliError(flag, f"not a number: {text!r}") from None


def _epsilon_list(text: str) -> list[float]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise CliError("epsilons", "at least one epsilon is required")
    return [_float_flag("epsilons", t) for t in items]


def _settings(kind: ActivationKind, terms: int | None, eps: float | None) -> SeriesSettings:
    d_terms, d_eps = DEFAULT_SETTINGS[kind]
    terms = d_terms if terms is None else terms
    eps = d_eps if eps is None else eps
    if terms < 1:
        raise CliError("terms", "terms must be ≥ 1")
    if not eps > 0:
        raise CliError("epsilon", "epsilon must be > 0")
    return SeriesSettings(terms, eps)


def _fault_spec(model: str, itype: str, n: int, m: int | None) -> FaultSpec:
    mdl = FaultModel(model)
    try:
        return FaultSpec(mdl, InjectionType(itype), n, 1 if m is None else m)
    except ValueError as exc:
        raise CliError("n" if str(exc).startswith("n ") else "m", str(exc)) from None


# output


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _record(kind, spec, m_shown, settings, runs, seed, detected, benign, silent, ratio) -> dict:
    return {
        "function": kind.value,
        "model": spec.model.value if spec else None,
        "type": spec.injection_type.value if spec else None,
        "n": spec.n if spec else None,
        "m": m_shown,
        "terms": settings.term_count,
        "epsilon": settings.epsilon,
        "runs": runs,
        "seed": seed,
        "detected": detected,
        "benign": benign,
        "silent": silent,
        "ratio": round(ratio, 4),
    }


def _csv_cell(key: str, value) -> str:
    if value is None:
        return ""
    if key == "ratio":
        return f"{value:.4f}"
    if isinstance(value, float):
        return _fmt_float(value)
    return str(value)


def render(records: Sequence[dict], fmt: str, columns: Sequence[str] = COLUMNS) -> str:
    if fmt == "json":
        return json.dumps([{c: r[c] for c in columns} for r in records], indent=2,
                          allow_nan=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_csv_cell(c, r[c]) for c in columns])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(None, f"cannot write {out}: {exc.strerror or exc}", status=1) from None
    log.info("wrote %s", out)


# commands


def cmd_campaign(args) -> int:
    kind = ActivationKind(args.function)
    settings = _settings(kind, args.terms, args.epsilon)
    spec = _fault_spec(args.model, args.type, args.n, args.m)
    cfg = CampaignConfig(kind, settings, spec, args.runs, args.lo, args.hi, args.seed,
                         args.benign_threshold)
    stats = run_campaigns([cfg], args.workers)[0]
    ratio = stats.effective_detection_ratio if args.ratio == "effective" else stats.detection_ratio
    m_shown = None if spec.model.term_level else spec.m
    rec = _record(kind, spec, m_shown, settings, stats.runs, args.seed, stats.detected_count,
                  stats.benign_count, stats.silent_count, ratio)
    _emit(render([rec], args.format), args.out)
    return 0


def cmd_consistency(args) -> int:
    kind = ActivationKind(args.function)
    terms = parse_term_range(args.terms)
    epsilons = _epsilon_list(args.epsilons)
    cells = run_consistency_sweep(kind, terms, epsilons, args.runs, args.seed, args.lo, args.hi,
                                  args.workers)
    records = [
        _record(kind, None, None, SeriesSettings(c.terms, c.epsilon), c.runs, c.seed, c.flagged,
                c.runs - c.flagged, 0, c.consistency_ratio)
        for c in cells
    ]
    _emit(render(records, args.format), args.out)
    return 0


def table_configs(table: str, runs: int, seed: int) -> list[tuple[CampaignConfig, int | None]]:
    """Campaign configs of one detection table, with the ``m`` value to report."""
    out = []
    for model, itype, pairs in TABLE_GRIDS[table]:
        for n, m in pairs:
            for kind in SERIES_FUNCTIONS:
                spec = FaultSpec(model, itype, n, 1 if m is None else m)
                terms, eps = DEFAULT_SETTINGS[kind]
                out.append((CampaignConfig(kind, SeriesSettings(terms, eps), spec, runs, seed=seed), m))
    return out


def cmd_reproduce_tables(args) -> int:
    try:
        os.makedirs(args.out_dir, exist_ok=True)
    except OSError as exc:
        raise CliError("out-dir", f"cannot create {args.out_dir}: {exc.strerror or exc}", status=1) from None
    ext = "json" if args.format == "json" else "csv"
    for table in TABLE_GRIDS:
        pairs = table_configs(table, args.runs, args.seed)
        log.info("table %s: %d campaigns x %d runs", table, len(pairs), args.runs)
        stats = run_campaigns([c for c, _ in pairs], args.workers)
        records = [
            _record(c.function, c.fault, m, c.settings, s.runs, args.seed, s.detected_count,
                    s.benign_count, s.silent_count, s.detection_ratio)
            for (c, m), s in zip(pairs, stats)
        ]
        _emit(render(records, args.format), os.path.join(args.out_dir, f"table_{table}.{ext}"))
    return 0


EVAL_COLUMNS = ["function", "x", "terms", "epsilon", "value", "checker_value", "residual", "verdict"]


def _parse_inject(text: str) -> FaultSpec:
    parts = text.split(":")
    if not 2 <= len(parts) <= 4:
        raise CliError("inject", f"expected model:type[:n[:m]], got {text!r}")
    try:
        model = FaultModel(parts[0])
        itype = InjectionType(parts[1])
        n = int(parts[2]) if len(parts) > 2 else 1
        m = int(parts[3]) if len(parts) > 3 else 1
        return FaultSpec(model, itype, n, m)
    except ValueError as exc:
        raise CliError("inject", str(exc)) from None


def cmd_eval(args) -> int:
    kind = ActivationKind(args.function)
    if kind is ActivationKind.RELU:
        if args.inject or args.skip_negation:
            raise CliError("inject" if args.inject else "skip-negation",
                           "relu is checked by recomputation; use --force-output")
        forward = relu_baseline(args.x) if args.force_output is None else args.force_output
        res = relu_protected(args.x, forward)
        terms, eps = None, res.epsilon_used
    else:
        if args.force_output is not None and args.skip_negation:
            raise CliError("force-output", "cannot combine with --skip-negation")
        settings = _settings(kind, args.terms, args.epsilon)
        terms, eps = settings.term_count, settings.epsilon
        x = clip_by_value(args.x, settings.clip_lo, settings.clip_hi)
        ctx = maclaurin_terms(series_argument(kind, x), terms)
        if args.inject:
            spec = _parse_inject(args.inject)
            if spec.n > terms:
                raise CliError("inject", f"n ({spec.n}) exceeds the number of terms ({terms})")
            rng = RandomStream(derive_run_seed(args.seed, 0))
            ctx = apply_fault(ctx, plan_faults(spec, terms, rng), spec.model, rng)
        baseline, _ = SERIES_FUNCTIONS[kind]
        if args.skip_negation:
            if kind is ActivationKind.EXPO:
                raise CliError("skip-negation", "expo has no negation step")
            y = negation_skipped_output(kind, ctx)
        elif args.force_output is not None:
            y = args.force_output
        else:
            y = baseline(ctx)
        res = CHECKS[kind](ctx, y, eps)
    rec = {
        "function": kind.value, "x": args.x, "terms": terms, "epsilon": eps,
        "value": res.value, "checker_value": res.checker_value, "residual": res.residual,
        "verdict": res.verdict.value,
    }
    _emit(render([rec], args.format, EVAL_COLUMNS), args.out)
    return 0


SOFTFLOAT_COLUMNS = ["op", "a", "b", "result_bits", "result", "native_bits", "ulp"]


def _native_f32(op: str, a: float, b: float) -> int | None:
    import numpy as np

    fa, fb = np.float32(a), np.float32(b)
    with np.errstate(all="ignore"):
        r = {"mul": lambda: fa * fb, "add": lambda: fa + fb, "sub": lambda: fa - fb,
             "div": lambda: fa / fb, "recip": lambda: np.float32(1) / fa}[op]()
    return struct.unpack("<I", np.float32(r).tobytes())[0]


def cmd_softfloat(args) -> int:
    a = sf.f32_bits(args.a)
    if args.op == "recip":
        w = sf.Float32Word.decompose(a)
        if w.exponent != sf.BIAS:
            raise CliError("a", "recip takes a significand-range value in [1, 2)")
        r = sf.nr_reciprocal(a)
        b_val = None
    else:
        if args.b is None:
            raise CliError("b", f"{args.op} needs a second operand")
        b = sf.f32_bits(args.b)
        r = {"mul": sf.f32_mul, "add": sf.f32_add, "sub": sf.f32_sub, "div": sf.f32_div_nr}[args.op](a, b)
        b_val = sf.f32_value(b)
    native = _native_f32(args.op, args.a, args.b if args.b is not None else 0.0)
    rec = {
        "op": args.op, "a": sf.f32_value(a), "b": b_val, "result_bits": f"{r:08x}",
        "result": sf.f32_value(r), "native_bits": f"{native:08x}",
        "ulp": sf.ulp_distance(r, native),
    }
    _emit(render([rec], args.format, SOFTFLOAT_COLUMNS), args.out)
    return 0


# parser


def _positive_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="write records here instead of stdout")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    runs = argparse.ArgumentParser(add_help=False)
    runs.add_argument("--runs", type=_positive_int, default=1000)
    runs.add_argument("--workers", type=_positive_int, default=1)
    runs.add_argument("--lo", type=_number, default=-3.0, help="lower input bound")
    runs.add_argument("--hi", type=_number, default=3.0, help="upper input bound")

    p = argparse.ArgumentParser(prog="actguard", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("campaign", parents=[common, runs], help="fault-injection detection campaign")
    c.add_argument("--function", choices=SERIES_KINDS, default="sigmoid")
    c.add_argument("--model", choices=[m.value for m in FaultModel], required=True)
    c.add_argument("--type", choices=[t.value for t in InjectionType], default="random")
    c.add_argument("--n", type=_positive_int, default=1, help="faulty terms per run")
    c.add_argument("--m", type=_positive_int, default=None, help="faulty bits per term")
    c.add_argument("--terms", type=_positive_int, default=None)
    c.add_argument("--epsilon", type=_number, default=None)
    c.add_argument("--benign-threshold", type=_number, default=None,
                   help="deviation up to which an undetected run counts as benign (default: epsilon)")
    c.add_argument("--ratio", choices=["all", "effective"], default="all",
                   help="denominator: all runs, or only runs not classed benign")
    c.set_defaults(handler=cmd_campaign)

    s = sub.add_parser("consistency", parents=[common, runs], help="fault-free false-positive sweep")
    s.add_argument("--function", choices=SERIES_KINDS, required=True)
    s.add_argument("--terms", required=True, help="inclusive term range a:b")
    s.add_argument("--epsilons", required=True, help="comma-separated thresholds")
    s.set_defaults(handler=cmd_consistency)

    r = sub.add_parser("reproduce-tables", parents=[common, runs],
                       help="run the three detection tables, one output file each")
    r.add_argument("--out-dir", default="tables")
    r.set_defaults(handler=cmd_reproduce_tables)

    e = sub.add_parser("eval", parents=[common], help="evaluate one input with its check")
    e.add_argument("--function", choices=[k.value for k in ActivationKind], required=True)
    e.add_argument("--x", type=_number, required=True)
    e.add_argument("--terms", type=_positive_int, default=None)
    e.add_argument("--epsilon", type=_number, default=None)
    e.add_argument("--force-output", type=_number, default=None,
                   help="check this output instead of the computed one")
    e.add_argument("--inject", default=None, metavar="MODEL:TYPE[:N[:M]]",
                   help="corrupt the cached terms before evaluating")
    e.add_argument("--skip-negation", action="store_true",
                   help="drop the sign flip in the exponent (sigmoid, tanh)")
    e.set_defaults(handler=cmd_eval)

    f = sub.add_parser("softfloat", parents=[common], help="one binary32 datapath operation")
    f.add_argument("--op", choices=["mul", "add", "sub", "div", "recip"], required=True)
    f.add_argument("--a", type=_number, required=True)
    f.add_argument("--b", type=_number, default=None)
    f.set_defaults(handler=cmd_softfloat)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="actguard: %(message)s", stream=sys.stderr)
    try:
        return args.handler(args)
    except ConfigError as exc:
        err = CliError(exc.flag, str(exc))
    except CliError as exc:
        err = exc
    except ValueError as exc:
        err = CliError(None, str(exc))
    print(f"actguard: error: {err}", file=sys.stderr)
    return err.status


if __name__ == "__main__":
    sys.exit(main())
