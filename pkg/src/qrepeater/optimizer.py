"""Exhaustive search over protocols, nesting levels and distillation vectors."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .keyrate import EvalResult, RepeaterConfig, evaluate, memories, rel_change
from .noisy_ops import NoiseParams
from .rates import LinkParams

STRATEGIES = ("alpha", "beta", "gamma")
PROTOCOL_ORDER = {"none": 0, "deutsch": 1, "duer": 2}
KEY_CUTOFF = 1e-10


@dataclass(frozen=True)
class SearchSpace:
    N_range: tuple[int, ...] = tuple(range(7))
    k_max: int = 5
    strategies: tuple[str, ...] = STRATEGIES
    protocols: tuple[str, ...] = ("none", "deutsch", "duer")
    cc_mode: str = "with_cc"
    input_state: str = "depolarized"

    def __post_init__(self):
        object.__setattr__(self, "N_range", tuple(sorted(set(int(n) for n in self.N_range))))
        object.__setattr__(self, "strategies", tuple(s for s in STRATEGIES if s in self.strategies))
        object.__setattr__(
            self, "protocols", tuple(sorted(set(self.protocols), key=PROTOCOL_ORDER.__getitem__))
        )
        if not self.N_range or not self.strategies or not self.protocols:
            raise ValueError("search space is empty")
        if min(self.N_range) < 0 or self.k_max < 0:
            raise ValueError("N and k_max must be non-negative")


def classify_strategy(k: Sequence[int]) -> str:
    if all(x == k[0] for x in k):
        return "alpha"
    if not any(k[1:]):
        return "beta"
    return "gamma"


def distillation_vectors(N: int, k_max: int, strategies: Sequence[str]) -> list[tuple[int, ...]]:
    """All vectors of length N+1 allowed by `strategies`, in lexicographic order."""
    vecs: set[tuple[int, ...]] = set()
    if "gamma" in strategies:
        vecs.update(itertools.product(range(k_max + 1), repeat=N + 1))
    if "alpha" in strategies:
        vecs.update((k,) * (N + 1) for k in range(k_max + 1))
    if "beta" in strategies:
        vecs.update((k,) + (0,) * N for k in range(k_max + 1))
    return sorted(vecs)


def candidates(space: SearchSpace):
    """Yield (protocol, N, k) in enumeration order.

    The all-zero vector is labelled 'none' when that protocol is searched,
    since every protocol degenerates to plain swapping there.
    """
    distilling = [p for p in space.protocols if p != "none"]
    for N in space.N_range:
        for k in distillation_vectors(N, space.k_max, space.strategies):
            if not any(k) and "none" in space.protocols:
                yield "none", N, k
            else:
                for p in distilling:
                    yield p, N, k


@dataclass(frozen=True)
class Optimum:
    config: Optional[RepeaterConfig]
    result: Optional[EvalResult]
    strategy: Optional[str]

    @property
    def key_rate(self) -> float:
        return 0.0 if self.result is None else self.result.key_rate

    @property
    def no_key(self) -> bool:
        return self.key_rate <= 0.0

    @property
    def below_cutoff(self) -> bool:
        return self.key_rate < KEY_CUTOFF

    @property
    def protocol(self) -> Optional[str]:
        return None if self.config is None else self.config.protocol

    @property
    def N(self) -> Optional[int]:
        return None if self.config is None else self.config.N

    @property
    def k(self) -> tuple[int, ...]:
        return () if self.config is None else self.config.k

    @property
    def memories(self) -> int:
        return 0 if self.result is None else self.result.memories


NO_KEY = Optimum(None, None, None)


def _rank(opt: Optimum):
    # larger K first, then fewer memories, smaller N, smaller k, protocol order
    return (-opt.key_rate, opt.memories, opt.N, opt.k, PROTOCOL_ORDER[opt.protocol])


def _base_config(F0, p_G, eta_d, link: LinkParams, space: SearchSpace):
    noise = NoiseParams(p_G, eta_d)

    def make(protocol, N, k):
        return RepeaterConfig(
            protocol=protocol,
            link=replace(link, N=N),
            k=k,
            noise=noise,
            F0=F0,
            input_state=space.input_state,
            cc_mode=space.cc_mode,
        )

    return make


def search(F0: float, p_G: float, eta_d: float, link: LinkParams, space: SearchSpace, memory_filter=None):
    """Evaluate every candidate; yields Optimum records in enumeration order."""
    make = _base_config(F0, p_G, eta_d, link, space)
    for protocol, N, k in candidates(space):
        if memory_filter is not None and not memory_filter(memories(protocol, k, N)):
            continue
        cfg = make(protocol, N, k)
        yield Optimum(cfg, evaluate(cfg), classify_strategy(k))


def best_of(options) -> Optimum:
    best = None
    for opt in options:
        if opt.no_key:
            continue
        if best is None or _rank(opt) < _rank(best):
            best = opt
    return NO_KEY if best is None else best


def optimize(F0: float, p_G: float, eta_d: float = 1.0, link: LinkParams = LinkParams(), space: SearchSpace = SearchSpace()) -> Optimum:
    """Global maximum of the key rate per memory over `space`.

    Returns NO_KEY (key_rate 0) when no configuration yields a positive key.
    """
    return best_of(search(F0, p_G, eta_d, link, space))


def optimize_table(F0, p_G, eta_d=1.0, link=LinkParams(), space=SearchSpace()) -> dict:
    """Best configuration for every (protocol, N) pair.

    The all-zero vector counts for every distilling protocol here.
    """
    table: dict = {}
    grouped = replace(space, protocols=tuple(p for p in space.protocols if p != "none") or ("deutsch",))
    for opt in search(F0, p_G, eta_d, link, grouped):
        key = (opt.protocol, opt.N)
        if opt.no_key:
            table.setdefault(key, NO_KEY)
            continue
        cur = table.get(key, NO_KEY)
        if cur.no_key or _rank(opt) < _rank(cur):
            table[key] = opt
    return table


# --- fixed number of memories -----------------------------------------------


@dataclass(frozen=True)
class SetupPartition:
    """Parallel setups using M memories in total.

    s[m - 1] setups of size m run side by side; setups[m] is the best single
    configuration using exactly m memories.
    """

    M: int
    s: tuple[int, ...]
    setups: dict = field(default_factory=dict)
    key_rate: float = 0.0

    @property
    def parts(self) -> list[int]:
        """Setup sizes, largest first, one entry per running setup."""
        return [m for m in range(self.M, 0, -1) for _ in range(self.s[m - 1])]


def memory_partitions(M: int):
    """All multiplicity vectors s with sum_m s_m * m == M."""
    if M < 1:
        raise ValueError("M must be at least 1")

    def rec(m, remaining):
        if m == 0:
            if remaining == 0:
                yield ()
            return
        for count in range(remaining // m, -1, -1):
            for rest in rec(m - 1, remaining - count * m):
                yield rest + (count,)

    yield from rec(M, M)


def best_per_size(M: int, F0, p_G, eta_d=1.0, link=LinkParams(), space=SearchSpace()) -> dict:
    best: dict[int, Optimum] = {m: NO_KEY for m in range(1, M + 1)}
    for opt in search(F0, p_G, eta_d, link, space, memory_filter=lambda m: m <= M):
        cur = best[opt.memories]
        if not opt.no_key and (cur.no_key or _rank(opt) < _rank(cur)):
            best[opt.memories] = opt
    return best


def partition_key_rate(s: Sequence[int], per_size: dict) -> float:
    """Total key rate per memory of running s[m-1] setups of size m."""
    M = sum(c * m for m, c in enumerate(s, start=1))
    # weight by memory share so that duplicating one setup returns its rate exactly
    return sum((c * m / M) * per_size[m].key_rate for m, c in enumerate(s, start=1) if c)


def optimize_fixed_memory(M: int, F0, p_G, eta_d=1.0, link=LinkParams(), space=SearchSpace()) -> SetupPartition:
    """Best way to spend exactly M memories on parallel setups."""
    per_size = best_per_size(M, F0, p_G, eta_d, link, space)

    def rank(s):
        # ties: fewer parallel setups, then larger setups
        return (-partition_key_rate(s, per_size), sum(s), tuple(-c for c in reversed(s)))

    best = min(memory_partitions(M), key=rank)
    return SetupPartition(M, best, per_size, partition_key_rate(best, per_size))


# --- grids --------------------------------------------------------------------


@dataclass(frozen=True)
class GridCell:
    F0: float
    p_G: float
    optimum: Optimum

    @property
    def below_cutoff(self) -> bool:
        return self.optimum.below_cutoff


def axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("resolution must be positive")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _cell(args):
    F0, p_G, eta_d, link, space = args
    return GridCell(F0, p_G, optimize(F0, p_G, eta_d, link, space))


def _run(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so results do not depend on completion order
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def grid_scan(F0_values, pG_values, eta_d=1.0, link=LinkParams(), space=SearchSpace(), workers: int = 1) -> list[GridCell]:
    """Optimum for every (F0, p_G) cell, F0 varying slowest."""
    jobs = [(float(F0), float(pG), eta_d, link, space) for F0 in F0_values for pG in pG_values]
    return _run(_cell, jobs, workers)


@dataclass(frozen=True)
class CCImpact:
    F0: float
    p_G: float
    with_cc: Optimum
    no_cc: Optimum

    @property
    def delta_rel(self) -> float:
        return rel_change(self.no_cc.key_rate, self.with_cc.key_rate)


def cc_impact(F0, p_G, eta_d=1.0, link=LinkParams(), space=SearchSpace()) -> CCImpact:
    """Optimize with and without acknowledgment times and compare."""
    return CCImpact(
        F0,
        p_G,
        optimize(F0, p_G, eta_d, link, replace(space, cc_mode="with_cc")),
        optimize(F0, p_G, eta_d, link, replace(space, cc_mode="no_cc")),
    )


def _cc_cell(args):
    return cc_impact(*args)


def cc_impact_grid(F0_values, pG_values, eta_d=1.0, link=LinkParams(), space=SearchSpace(), workers: int = 1) -> list[CCImpact]:
    jobs = [(float(F0), float(pG), eta_d, link, space) for F0 in F0_values for pG in pG_values]
    return _run(_cc_cell, jobs, workers)
