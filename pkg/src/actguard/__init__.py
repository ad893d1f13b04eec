"""Identity-based error detection for activation functions, with a bit-level fault-injection campaign driver."""
from ._backend import BACKEND
from .activations import (
    ActivationKind,
    ProtectedResult,
    Verdict,
    expo_baseline,
    expo_protected,
    negation_skipped_output,
    relu_baseline,
    relu_protected,
    sigmoid_baseline,
    sigmoid_protected,
    tanh_baseline,
    tanh_protected,
)
from .campaign import (
    CampaignConfig,
    CampaignStats,
    Classification,
    ConfigError,
    RunOutcome,
    run_campaigns,
    run_consistency_sweep,
    run_detection_campaign,
    run_fault_free,
    trace_campaign,
)
from .faults import FaultModel, FaultPlan, FaultSpec, InjectionType, apply_fault, plan_faults
from .rng import RandomStream, derive_run_seed
from .series import SeriesContext, SeriesSettings, Sign, clip_by_value, maclaurin_terms, sum_exp

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ActivationKind",
    "CampaignConfig",
    "CampaignStats",
    "Classification",
    "ConfigError",
    "FaultModel",
    "FaultPlan",
    "FaultSpec",
    "InjectionType",
    "ProtectedResult",
    "RandomStream",
    "RunOutcome",
    "SeriesContext",
    "SeriesSettings",
    "Sign",
    "Verdict",
    "apply_fault",
    "clip_by_value",
    "derive_run_seed",
    "expo_baseline",
    "expo_protected",
    "maclaurin_terms",
    "negation_skipped_output",
    "plan_faults",
    "relu_baseline",
    "relu_protected",
    "run_campaigns",
    "run_consistency_sweep",
    "run_detection_campaign",
    "run_fault_free",
    "sigmoid_baseline",
    "sigmoid_protected",
    "sum_exp",
    "tanh_baseline",
    "tanh_protected",
    "trace_campaign",
]
