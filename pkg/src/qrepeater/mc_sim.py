"""Monte Carlo sampling of the time to deliver one end-to-end pair.

Event model, in units of T0:

* an elementary attempt costs 2 (send + acknowledge) and succeeds with P0;
* a swap at level n waits for two pairs of level n-1 (the later of the two),
  then spends 2**(n-1) on the acknowledgment;
* a recurrence round at level n waits for two pairs from the previous round,
  then spends 2**n;
* a pumping round at level n waits for the held pair, then produces a fresh
  level-n pair, then spends 2**n;
* a failed swap or round discards its inputs and the whole step restarts.

Each step is therefore a geometric number of i.i.d. attempts. Trials are
drawn in fixed-size chunks whose generators are derived from (seed, chunk
index), so results do not depend on how chunks are spread over workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .rates import ProbabilityTrace, tau_for

CHUNK = 4096


@dataclass(frozen=True)
class SimConfig:
    trace: ProbabilityTrace
    protocol: str = "deutsch"
    cc_mode: str = "with_cc"
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.protocol not in ("none", "deutsch", "duer"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        probs = (*self.trace.p_es, *(p for lvl in self.trace.p_d for p in lvl))
        if any(not 0.0 < p <= 1.0 for p in probs):
            raise ValueError("simulation needs success probabilities in (0, 1]")

    @property
    def analytic_tau(self) -> float:
        return tau_for(self.protocol, self.trace, cc=self.cc_mode == "with_cc")


@dataclass(frozen=True)
class SimResult:
    mean_tau: float
    std_error: float
    trials: int


def _renewal(rng, p: float, size: int, attempt) -> np.ndarray:
    """Sum of Geometric(p) i.i.d. attempt durations, for `size` independent runs."""
    if p >= 1.0:
        return attempt(size)
    counts = rng.geometric(p, size)
    durations = attempt(int(counts.sum()))
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return np.add.reduceat(durations, starts)


class _Sampler:
    def __init__(self, cfg: SimConfig, rng: np.random.Generator):
        self.trace = cfg.trace
        self.pumping = cfg.protocol == "duer"
        self.cc = cfg.cc_mode == "with_cc"
        self.rng = rng

    def ack(self, units: int) -> int:
        return units if self.cc else 0

    def pair(self, n: int, rounds: int, size: int) -> np.ndarray:
        """Waiting times for a level-n pair after `rounds` distillation rounds."""
        rng, tr = self.rng, self.trace
        if rounds == 0 and n == 0:
            return 2 * rng.geometric(tr.p0, size)
        if rounds == 0:
            below = len(tr.p_d[n - 1])
            ack = self.ack(2 ** (n - 1))

            def attempt(m):
                return np.maximum(self.pair(n - 1, below, m), self.pair(n - 1, below, m)) + ack

            return _renewal(rng, tr.p_es[n], size, attempt)
        ack = self.ack(2**n)
        p = tr.p_d[n][rounds - 1]
        if self.pumping:

            def attempt(m):
                return self.pair(n, rounds - 1, m) + self.pair(n, 0, m) + ack

        else:

            def attempt(m):
                return np.maximum(self.pair(n, rounds - 1, m), self.pair(n, rounds - 1, m)) + ack

        return _renewal(rng, p, size, attempt)

    def run(self, size: int) -> np.ndarray:
        N = self.trace.N
        return self.pair(N, len(self.trace.p_d[N]), size)


def _chunk_generator(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _simulate_chunk(args) -> np.ndarray:
    cfg, index, size = args
    return _Sampler(cfg, _chunk_generator(cfg.seed, index)).run(size)


def sample_tau(cfg: SimConfig, workers: int = 1) -> np.ndarray:
    """Raw per-trial waiting times (integers, units of T0)."""
    jobs = []
    for index, start in enumerate(range(0, cfg.trials, CHUNK)):
        jobs.append((cfg, index, min(CHUNK, cfg.trials - start)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, jobs))
    else:
        parts = [_simulate_chunk(j) for j in jobs]
    return np.concatenate(parts)


def simulate_tau(cfg: SimConfig, workers: int = 1) -> SimResult:
    """Mean waiting time and its standard error over `cfg.trials` runs."""
    t = sample_tau(cfg, workers).astype(float)
    err = float(t.std(ddof=1) / np.sqrt(t.size)) if t.size > 1 else 0.0
    return SimResult(float(t.mean()), err, int(t.size))


def max_of_two_geometric_mean(p: float) -> float:
    """Exact E[max(G1, G2)] for i.i.d. geometric attempt counts with success p."""
    return (3.0 - 2.0 * p) / (p * (2.0 - p))
