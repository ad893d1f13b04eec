"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``; results go to stdout as a
small table. Both backends must produce identical counts, which is checked
before timing is reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from actguard import _backend
from actguard import softfloat as sf
from actguard.activations import ActivationKind
from actguard.campaign import CampaignConfig, default_settings, run_campaigns
from actguard.faults import FaultModel, FaultSpec, InjectionType


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, result = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def campaign_case(runs: int):
    kind = ActivationKind.TANH
    cfg = CampaignConfig(kind, default_settings(kind),
                         FaultSpec(FaultModel.BIT_FLIP, InjectionType.RANDOM, 3, 5), runs)
    return lambda backend: run_campaigns([cfg], backend=backend)[0]


def softfloat_case(size: int):
    rng = np.random.default_rng(0)
    a = ((rng.integers(87, 168, size) << 23) | rng.integers(0, 1 << 23, size)).astype(np.uint32)
    b = ((rng.integers(87, 168, size) << 23) | rng.integers(0, 1 << 23, size)).astype(np.uint32)
    return lambda backend: sf.div_array(a, b, backend=backend)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--runs", type=int, default=5000, help="campaign runs per timing")
    p.add_argument("--ops", type=int, default=20000, help="binary32 divisions per timing")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    if "compiled" not in _backend.available():
        raise SystemExit("compiled kernels are not built; install the package with a C compiler")

    cases = [(f"campaign, {args.runs} runs", campaign_case(args.runs), args.runs),
             (f"binary32 divide, {args.ops} ops", softfloat_case(args.ops), args.ops)]
    print(f"{'case':32} {'python s':>10} {'compiled s':>11} {'speedup':>8} {'us/item py':>11} {'us/item c':>10}")
    for name, case, items in cases:
        t_py, r_py = best_of(lambda: case("python"), args.repeat)
        t_c, r_c = best_of(lambda: case("compiled"), args.repeat)
        same = (r_py == r_c).all() if isinstance(r_py, np.ndarray) else r_py == r_c
        if not same:
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:32} {t_py:10.4f} {t_c:11.5f} {t_py / t_c:8.0f} "
              f"{1e6 * t_py / items:11.2f} {1e6 * t_c / items:10.3f}")


if __name__ == "__main__":
    main()
