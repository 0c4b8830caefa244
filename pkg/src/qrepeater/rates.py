"""Waiting times and repeater rates for nested repeaters with distillation.

All waiting times are in units of T0 = L0 / c. Level n of a chain with
maximal nesting level N spans 2**n elementary segments; level 0 pairs are
generated directly, higher levels by swapping two pairs of the level below.
Each level may then run k_n distillation rounds.

Two independent evaluation routes are provided: the level-by-level
recurrences (`tau_deutsch`, `tau_duer`) and their unrolled closed forms
(`tau_deutsch_closed`, `tau_duer_closed`, `repeater_rate_nc_deutsch`,
`repeater_rate_nc_duer`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .noisy_ops import (
    NoiseParams,
    apply_detector_efficiency,
    deutsch_round,
    pump_round,
    swap,
)
from .states import BellCoefficients

RATE_FLOOR = 1e-300
PROTOCOLS = ("none", "deutsch", "duer")


@dataclass(frozen=True)
class LinkParams:
    """Fiber link of total length `L` (km) split into 2**N segments."""

    L: float = 600.0
    N: int = 0
    alpha: float = 0.17  # dB/km
    c: float = 2e5  # km/s

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 0:
            raise ValueError(f"N must be a non-negative integer, got {self.N}")
        if self.alpha < 0 or not self.c > 0:
            raise ValueError("attenuation must be >= 0 and c > 0")

    @property
    def L0(self) -> float:
        return self.L / 2**self.N

    @property
    def T0(self) -> float:
        return self.L0 / self.c

    @property
    def P0(self) -> float:
        return 10.0 ** (-self.alpha * self.L0 / 10.0)


def validate_k(k: Sequence[int], N: int) -> tuple[int, ...]:
    k = tuple(int(x) for x in k)
    if len(k) != N + 1:
        raise ValueError(f"distillation vector must have length N+1={N + 1}, got {len(k)}")
    if any(x < 0 for x in k):
        raise ValueError(f"distillation rounds must be non-negative: {k}")
    return k


@dataclass(frozen=True)
class ProbabilityTrace:
    """Per-level success probabilities and states along the chain.

    p_es[n] is the swapping success at level n (p_es[0] == 1 by convention);
    p_d[n][i - 1] is the success of distillation round i at level n. All
    probabilities already include detector losses. states[n][i] is the pair
    at level n after i rounds, when known.
    """

    p0: float
    p_es: tuple[float, ...]
    p_d: tuple[tuple[float, ...], ...]
    states: Optional[tuple[tuple[BellCoefficients, ...], ...]] = None

    def __post_init__(self):
        if len(self.p_es) != len(self.p_d):
            raise ValueError("p_es and p_d must have one entry per level")
        if not 0.0 < self.p0 <= 1.0:
            raise ValueError(f"P0 must lie in (0, 1], got {self.p0}")
        for p in (*self.p_es, *(q for lvl in self.p_d for q in lvl)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability out of range: {p}")
        if self.states is not None:
            for lvl, probs in zip(self.states, self.p_d):
                if len(lvl) != len(probs) + 1:
                    raise ValueError("states must hold k_n + 1 entries per level")

    @property
    def N(self) -> int:
        return len(self.p_es) - 1

    @property
    def k(self) -> tuple[int, ...]:
        return tuple(len(lvl) for lvl in self.p_d)

    @property
    def final_state(self) -> Optional[BellCoefficients]:
        return None if self.states is None else self.states[-1][-1]


# --- trace construction -----------------------------------------------------


@lru_cache(maxsize=1 << 18)
def _swap_up(below: BellCoefficients, noise: NoiseParams):
    return swap(below, below, noise)


@lru_cache(maxsize=1 << 18)
def _level_rounds(protocol: str, start: BellCoefficients, noise: NoiseParams, rounds: int):
    """States and detector-scaled probabilities for `rounds` rounds at one level."""
    if rounds == 0:
        return (start,), ()
    states, probs = _level_rounds(protocol, start, noise, rounds - 1)
    current = states[-1]
    if protocol == "duer":
        outcome = pump_round(current, start, noise)
    else:
        outcome = deutsch_round(current, current, noise)
    p = apply_detector_efficiency(outcome.success_prob, noise)
    return states + (outcome.state,), probs + (p,)


@lru_cache(maxsize=1 << 18)
def _chain_levels(protocol: str, elementary: BellCoefficients, noise: NoiseParams, k: tuple):
    """(p_es, p_d, states) for the prefix `k`; shared across vectors with that prefix."""
    if len(k) == 1:
        states, probs = _level_rounds(protocol, elementary, noise, k[0])
        return (1.0,), (probs,), (states,)
    p_es, p_d, states = _chain_levels(protocol, elementary, noise, k[:-1])
    below = states[-1][-1]
    swapped = _swap_up(below, noise)
    lvl_states, lvl_probs = _level_rounds(protocol, swapped.state, noise, k[-1])
    return (
        p_es + (apply_detector_efficiency(swapped.success_prob, noise),),
        p_d + (lvl_probs,),
        states + (lvl_states,),
    )


def build_trace(protocol: str, elementary: BellCoefficients, k, noise: NoiseParams, p0: float) -> ProbabilityTrace:
    """Compose the noisy maps level by level for distillation vector `k`.

    Raises DistillationImpossible when a round has negligible success.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    k = tuple(int(x) for x in k)
    if protocol == "none" and any(k):
        raise ValueError("protocol 'none' requires an all-zero distillation vector")
    p_es, p_d, states = _chain_levels(protocol, elementary, noise, k)
    return ProbabilityTrace(p0=p0, p_es=p_es, p_d=p_d, states=states)


def chain_trace(cfg) -> ProbabilityTrace:
    """Trace for a RepeaterConfig-like object (protocol, link, k, noise, elementary)."""
    k = validate_k(cfg.k, cfg.link.N)
    return build_trace(cfg.protocol, cfg.elementary, k, cfg.noise, cfg.link.P0)


def clear_caches() -> None:
    _swap_up.cache_clear()
    _level_rounds.cache_clear()
    _chain_levels.cache_clear()


# --- recurrences ------------------------------------------------------------


def tau_deutsch(trace: ProbabilityTrace, cc: bool = True) -> float:
    """Recurrence for the recurrence protocol; `cc=False` drops acknowledgments."""
    if any(p == 0.0 for p in (*trace.p_es, *(q for lvl in trace.p_d for q in lvl))):
        return math.inf
    tau = 2.0 / trace.p0
    for n in range(trace.N + 1):
        if n > 0:
            tau = (1.5 * tau + (2.0 ** (n - 1) if cc else 0.0)) / trace.p_es[n]
        ack = 2.0**n if cc else 0.0
        for p in trace.p_d[n]:
            tau = (1.5 * tau + ack) / p
    return tau


def tau_duer(trace: ProbabilityTrace, cc: bool = True) -> float:
    """Recurrence for entanglement pumping; each round waits for a fresh level pair."""
    if any(p == 0.0 for p in (*trace.p_es, *(q for lvl in trace.p_d for q in lvl))):
        return math.inf
    tau = 2.0 / trace.p0
    for n in range(trace.N + 1):
        if n > 0:
            tau = (1.5 * tau + (2.0 ** (n - 1) if cc else 0.0)) / trace.p_es[n]
        fresh = tau
        ack = 2.0**n if cc else 0.0
        for p in trace.p_d[n]:
            tau = (tau + fresh + ack) / p
    return tau


# --- closed forms -------------------------------------------------------------


def _inv_suffix_products(probs: Sequence[float]) -> list[float]:
    """[prod_{j=0}^{i} 1/P(k-j) for i in 0..k-1] for round probabilities P(1..k)."""
    out, acc = [], 1.0
    for p in reversed(probs):
        acc /= p
        out.append(acc)
    return out


def _deutsch_level_coeffs(probs, n: int, cc: bool) -> tuple[float, float]:
    k = len(probs)
    prods = _inv_suffix_products(probs)
    alpha = 1.5**k * (prods[-1] if k else 1.0)
    beta = 2.0**n * sum(1.5**i * prods[i] for i in range(k)) if cc else 0.0
    return alpha, beta


def _duer_level_coeffs(probs, n: int, cc: bool) -> tuple[float, float]:
    prods = _inv_suffix_products(probs)
    a = (prods[-1] if prods else 1.0) + sum(prods)
    b = 2.0**n * sum(prods) if cc else 0.0
    return a, b


def _unroll(trace: ProbabilityTrace, coeffs, cc: bool) -> float:
    if any(p == 0.0 for p in (*trace.p_es, *(q for lvl in trace.p_d for q in lvl))):
        return math.inf
    N = trace.N
    mult = [0.0] * (N + 1)
    add = [0.0] * (N + 1)
    for n in range(N + 1):
        mult[n], add[n] = coeffs(trace.p_d[n], n, cc)
    tau_base = (2.0 / trace.p0) * mult[0] + add[0]

    def chain(lo: int) -> float:
        # prod_{m=lo}^{N} mult(m) / P_ES(m)
        out = 1.0
        for m in range(lo, N + 1):
            out *= mult[m] / trace.p_es[m]
        return out

    total = tau_base * 1.5**N * chain(1)
    for i in range(1, N + 1):
        if cc:
            total += 1.5 ** (N - i) * 2.0 ** (i - 1) * chain(i)
        total += 1.5 ** (N - i) * add[i] * chain(i + 1)
    return total


def tau_deutsch_closed(trace: ProbabilityTrace, cc: bool = True) -> float:
    return _unroll(trace, _deutsch_level_coeffs, cc)


def tau_duer_closed(trace: ProbabilityTrace, cc: bool = True) -> float:
    return _unroll(trace, _duer_level_coeffs, cc)


def _flush(rate: float) -> float:
    return 0.0 if rate < RATE_FLOOR else rate


def repeater_rate(tau: float, link: LinkParams) -> float:
    """Pairs per second for a waiting time `tau` in units of T0."""
    if not tau > 0:
        raise ValueError(f"waiting time must be positive, got {tau}")
    if math.isinf(tau):
        return 0.0
    return _flush(1.0 / (link.T0 * tau))


def repeater_rate_nc_deutsch(trace: ProbabilityTrace, link: LinkParams) -> float:
    """Product formula without acknowledgment times, level-0 rounds included."""
    exponent = trace.N + sum(trace.k)
    prob = trace.p0
    for n in range(trace.N + 1):
        prob *= trace.p_es[n] * math.prod(trace.p_d[n])
    return _flush(prob * (2.0 / 3.0) ** exponent / (2.0 * link.T0))


def repeater_rate_nc_duer(trace: ProbabilityTrace, link: LinkParams) -> float:
    if any(p == 0.0 for lvl in trace.p_d for p in lvl):
        return 0.0
    rate = trace.p0 / (2.0 * link.T0) * (2.0 / 3.0) ** trace.N
    for n in range(trace.N + 1):
        a, _ = _duer_level_coeffs(trace.p_d[n], n, cc=False)
        rate *= trace.p_es[n] / a
    return _flush(rate)


def tau_for(protocol: str, trace: ProbabilityTrace, cc: bool = True) -> float:
    """Recurrence waiting time for `protocol` ('none' behaves like 'deutsch')."""
    if protocol == "duer":
        return tau_duer(trace, cc)
    return tau_deutsch(trace, cc)
