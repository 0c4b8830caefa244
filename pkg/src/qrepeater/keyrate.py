"""Six-state secret fraction, memory accounting and key rate per memory."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional


from .noisy_ops import DistillationImpossible, NoiseParams
from .rates import (
    PROTOCOLS,
    LinkParams,
    ProbabilityTrace,
    chain_trace,
    repeater_rate,
    tau_for,
    validate_k,
)
from .states import BellCoefficients, error_rates, input_state

CC_MODES = ("with_cc", "no_cc")
_ARG_GUARD = 1e-15


def binary_entropy(p: float) -> float:
    p = min(max(p, 0.0), 1.0)
    if p < _ARG_GUARD or p > 1.0 - _ARG_GUARD:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def secret_fraction(e_x: float, e_y: float, e_z: float) -> float:
    """Asymptotic one-way secret fraction of the six-state protocol.

    The raw value is returned, negative where no key can be distilled; callers
    clamp at the key-rate level.
    """
    for e in (e_x, e_y, e_z):
        if not -_ARG_GUARD <= e <= 1.0 + _ARG_GUARD:
            raise ValueError(f"error rate out of range: {e}")
    r = 1.0 - binary_entropy(e_z)
    if e_z > _ARG_GUARD:
        r -= e_z * binary_entropy((1.0 + (e_x - e_y) / e_z) / 2.0)
    if 1.0 - e_z > _ARG_GUARD:
        r -= (1.0 - e_z) * binary_entropy((1.0 - (e_x + e_y + e_z) / 2.0) / (1.0 - e_z))
    return r


def state_secret_fraction(s: BellCoefficients) -> float:
    return secret_fraction(*error_rates(s))


def memories_deutsch(k) -> int:
    total = sum(k)
    if total > 62:
        raise OverflowError(f"2**{total} memories does not fit in 64 bits")
    return 1 << total


def memories_duer(k, N: int) -> int:
    return N + 2 - sum(1 for x in k if x == 0)


def memories(protocol: str, k, N: int) -> int:
    if protocol == "deutsch":
        return memories_deutsch(k)
    if protocol == "duer":
        return memories_duer(k, N)
    return 1


@dataclass(frozen=True)
class RepeaterConfig:
    protocol: str
    link: LinkParams
    k: tuple[int, ...]
    noise: NoiseParams = field(default_factory=NoiseParams)
    F0: float = 1.0
    input_state: str = "depolarized"
    cc_mode: str = "with_cc"

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        object.__setattr__(self, "k", validate_k(self.k, self.link.N))
        if self.protocol == "none" and any(self.k):
            raise ValueError("protocol 'none' requires an all-zero distillation vector")
        if self.cc_mode not in CC_MODES:
            raise ValueError(f"unknown cc_mode {self.cc_mode!r}")
        input_state(self.input_state, self.F0)  # validates both

    @property
    def elementary(self) -> BellCoefficients:
        return input_state(self.input_state, self.F0)

    @property
    def N(self) -> int:
        return self.link.N


@dataclass(frozen=True)
class EvalResult:
    repeater_rate: float  # pairs / s
    secret_fraction: float  # bits / pair, unclamped
    memories: int
    key_rate: float  # bits / s / memory
    tau: float  # units of T0
    trace: Optional[ProbabilityTrace]

    @property
    def final_state(self) -> Optional[BellCoefficients]:
        return None if self.trace is None else self.trace.final_state


def evaluate(cfg: RepeaterConfig) -> EvalResult:
    """Key rate per memory per second for one repeater configuration."""
    M = memories(cfg.protocol, cfg.k, cfg.N)
    try:
        trace = chain_trace(cfg)
    except DistillationImpossible:
        return EvalResult(0.0, float("nan"), M, 0.0, math.inf, None)
    tau = tau_for(cfg.protocol, trace, cc=cfg.cc_mode == "with_cc")
    rate = repeater_rate(tau, cfg.link)
    r = state_secret_fraction(trace.final_state)
    key = rate * r * cfg.noise.eta_d**2 / M if r > 0 else 0.0
    return EvalResult(rate, r, M, key, tau, trace)


def rel_change(a: float, b: float) -> float:
    """(a - b) / max(a, b), zero when both vanish."""
    m = max(a, b)
    if m == 0:
        return 0.0
    return (a - b) / m


def symmetric_threshold() -> float:
    """Error rate e at which the secret fraction with e_X = e_Y = e_Z = e vanishes."""
    from scipy.optimize import brentq

    return brentq(lambda e: secret_fraction(e, e, e), 0.05, 0.2, xtol=1e-14)
