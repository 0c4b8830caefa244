"""Secret key rate per memory of nested quantum repeaters with distillation."""

__version__ = "0.1.0"

from .keyrate import (
    EvalResult,
    RepeaterConfig,
    evaluate,
    memories_deutsch,
    memories_duer,
    rel_change,
    secret_fraction,
)
from .noisy_ops import NoiseParams, deutsch_round, pump_round, swap
from .optimizer import SearchSpace, cc_impact, grid_scan, optimize, optimize_fixed_memory
from .rates import LinkParams, ProbabilityTrace, chain_trace, repeater_rate
from .states import BellCoefficients, binary, depolarized, error_rates, fidelity

__all__ = [
    "BellCoefficients",
    "EvalResult",
    "LinkParams",
    "NoiseParams",
    "ProbabilityTrace",
    "RepeaterConfig",
    "SearchSpace",
    "binary",
    "cc_impact",
    "chain_trace",
    "depolarized",
    "deutsch_round",
    "error_rates",
    "evaluate",
    "fidelity",
    "grid_scan",
    "memories_deutsch",
    "memories_duer",
    "optimize",
    "optimize_fixed_memory",
    "pump_round",
    "rel_change",
    "repeater_rate",
    "secret_fraction",
    "swap",
]
