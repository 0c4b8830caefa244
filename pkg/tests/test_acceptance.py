"""Acceptance criteria, one marked group per criterion.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import numpy as np
import pytest

from qrepeater.cli import run
from qrepeater.keyrate import RepeaterConfig, evaluate, secret_fraction, symmetric_threshold
from qrepeater.mc_sim import SimConfig, max_of_two_geometric_mean, simulate_tau
from qrepeater.noisy_ops import NoiseParams, deutsch_round, swap
from qrepeater.optimizer import (
    SearchSpace,
    best_per_size,
    cc_impact,
    optimize,
    optimize_fixed_memory,
    partition_key_rate,
)
from qrepeater.rates import (
    LinkParams,
    ProbabilityTrace,
    chain_trace,
    tau_deutsch,
    tau_deutsch_closed,
    tau_duer,
    tau_duer_closed,
)
from qrepeater.states import depolarized

from conftest import random_bell


def within_factor(value, target, factor=2.0):
    return target / factor <= value <= target * factor


# --- 1 ------------------------------------------------------------------------------


@pytest.mark.criterion(1, "link constants and base waiting time")
def test_c1_constants():
    link = LinkParams(L=600, N=2)
    assert link.L0 == pytest.approx(150.0, rel=1e-12)
    assert link.T0 == pytest.approx(7.5e-4, rel=1e-12)
    assert link.P0 == pytest.approx(10 ** (-2.55), rel=1e-12)
    assert link.P0 == pytest.approx(2.8184e-3, rel=1e-4)
    tr = ProbabilityTrace(link.P0, (1.0,), ((),))
    assert tau_deutsch(tr) == pytest.approx(2 / link.P0, rel=1e-12)
    assert tau_duer(tr) == pytest.approx(2 / link.P0, rel=1e-12)


# --- 2 ------------------------------------------------------------------------------


@pytest.mark.criterion(2, "closed forms equal recurrences")
def test_c2_closed_forms():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        N = int(rng.integers(0, 6))
        k = rng.integers(0, 5, N + 1)
        tr = ProbabilityTrace(
            float(rng.uniform(1e-5, 1.0)),
            (1.0,) + tuple(rng.uniform(0.01, 1.0, N)),
            tuple(tuple(rng.uniform(0.01, 1.0, kn)) for kn in k),
        )
        for cc in (True, False):
            assert tau_deutsch_closed(tr, cc) == pytest.approx(tau_deutsch(tr, cc), rel=1e-12)
            assert tau_duer_closed(tr, cc) == pytest.approx(tau_duer(tr, cc), rel=1e-12)


# --- 3 ------------------------------------------------------------------------------


@pytest.mark.criterion(3, "ideal distillation and swapping maps")
def test_c3_ideal_maps():
    rng = np.random.default_rng(3)
    noise = NoiseParams()
    for _ in range(1000):
        s = random_bell(rng)
        A, B, C, D = s.as_tuple()
        P = (A + D) ** 2 + (B + C) ** 2
        out = deutsch_round(s, s, noise)
        assert abs(out.success_prob - P) <= 1e-12
        expected = np.array([A * A + D * D, 2 * A * D, B * B + C * C, 2 * B * C]) / P
        assert np.abs(out.state.as_array() - expected).max() <= 1e-12

        t = random_bell(rng)
        conv = np.zeros(4)
        for i in range(4):
            for j in range(4):
                conv[i ^ j] += s.as_array()[i] * t.as_array()[j]
        assert np.abs(swap(s, t, noise).state.as_array() - conv).max() <= 1e-12
    assert swap(depolarized(0.9), depolarized(0.9), noise).state.a == pytest.approx(0.81 + 0.01 / 3, abs=1e-12)


# --- 4 ------------------------------------------------------------------------------


@pytest.mark.criterion(4, "reference key rates within a factor of 2")
@pytest.mark.parametrize(
    "protocol, F0, pG, k, target",
    [
        ("deutsch", 0.9, 0.96, (0, 3, 1), 3.03e-4),
        ("duer", 0.97, 0.99, (0, 0, 0), 0.19),
        ("duer", 0.97, 0.99, (0, 1, 1, 1, 0), 0.96),
    ],
)
def test_c4_reference_key_rates(protocol, F0, pG, k, target):
    cfg = RepeaterConfig(protocol, LinkParams(600, len(k) - 1), k, NoiseParams(pG), F0)
    assert within_factor(evaluate(cfg).key_rate, target)


@pytest.mark.criterion(4, "reference key rates within a factor of 2")
def test_c4_gamma_beats_alpha_beta():
    gamma = optimize(0.97, 0.99, space=SearchSpace(N_range=range(5), k_max=5))
    ab = optimize(0.97, 0.99, space=SearchSpace(N_range=range(7), k_max=5, strategies=("alpha", "beta")))
    assert gamma.strategy == "gamma"
    assert gamma.key_rate > ab.key_rate


# --- 5 ------------------------------------------------------------------------------

PARTITION_SPACE = SearchSpace(protocols=("none", "duer"))


@pytest.mark.criterion(5, "fixed-memory partitions")
def test_c5_duplication_identity():
    per_size = best_per_size(6, 0.97, 0.99, space=PARTITION_SPACE)
    for m in (1, 2, 3):
        s = [0] * 6
        s[m - 1] = 6 // m
        assert partition_key_rate(s, per_size) == per_size[m].key_rate


@pytest.mark.criterion(5, "fixed-memory partitions")
def test_c5_six_memories():
    part = optimize_fixed_memory(6, 0.97, 0.99, space=PARTITION_SPACE)
    assert part.parts == [3, 3]
    assert part.key_rate == part.setups[3].key_rate
    assert within_factor(part.key_rate, 0.96)


# --- 6 ------------------------------------------------------------------------------


@pytest.mark.criterion(6, "detector-efficiency scaling")
@pytest.mark.parametrize("protocol, k", [("deutsch", (0, 3, 1)), ("deutsch", (2, 0, 0)), ("none", (0, 0, 0))])
@pytest.mark.parametrize("eta", [0.95, 0.8, 0.3])
def test_c6_detector_scaling(protocol, k, eta):
    def key(e):
        cfg = RepeaterConfig(protocol, LinkParams(600, 2), k, NoiseParams(0.99, e), 0.97, cc_mode="no_cc")
        return evaluate(cfg).key_rate

    assert key(1.0) > 0
    assert key(eta) / key(1.0) == pytest.approx(eta ** (2 * (2 + sum(k)) + 2), rel=1e-12)


# --- 7 ------------------------------------------------------------------------------


@pytest.mark.criterion(7, "six-state threshold")
def test_c7_threshold():
    assert abs(symmetric_threshold() - 0.1262) <= 0.0005
    assert secret_fraction(0.0, 0.0, 0.0) == 1.0


# --- 8 ------------------------------------------------------------------------------


def _noisy_trace(protocol, k):
    cfg = RepeaterConfig(protocol, LinkParams(600, len(k) - 1), k, NoiseParams(0.96), 0.9)
    return chain_trace(cfg)


MC_CASES = {
    "deutsch-N0-k1": ("deutsch", ProbabilityTrace(0.005, (1.0,), ((0.68,),))),
    "duer-N0-k2": ("duer", ProbabilityTrace(0.005, (1.0,), ((0.6, 0.7),))),
    "swap-N1": ("none", ProbabilityTrace(0.01, (1.0, 1.0), ((), ()))),
    "swap-N1-pes05": ("none", ProbabilityTrace(0.01, (1.0, 0.5), ((), ()))),
    "deutsch-N1-k01": ("deutsch", ProbabilityTrace(0.01, (1.0, 1.0), ((), (0.7,)))),
    "swap-N2": ("none", ProbabilityTrace(0.01, (1.0, 1.0, 1.0), ((), (), ()))),
    "deutsch-N2-k031": ("deutsch", _noisy_trace("deutsch", (0, 3, 1))),
    "duer-N2-k232": ("duer", _noisy_trace("duer", (2, 3, 2))),
}


@pytest.mark.criterion(8, "Monte Carlo agrees with the recurrences")
@pytest.mark.parametrize("name", list(MC_CASES))
def test_c8_monte_carlo(name):
    protocol, trace = MC_CASES[name]
    assert trace.p0 <= 0.01
    assert min((*trace.p_es, *(p for lvl in trace.p_d for p in lvl))) >= 0.5
    cfg = SimConfig(trace, protocol=protocol, trials=100_000, seed=8)
    res = simulate_tau(cfg)
    rel = res.mean_tau / cfg.analytic_tau - 1
    print(f"{name}: simulated {res.mean_tau:.6g} analytic {cfg.analytic_tau:.6g} rel {rel:+.4f}")
    assert abs(rel) <= 0.05


@pytest.mark.criterion(8, "Monte Carlo agrees with the recurrences")
@pytest.mark.parametrize("p", [0.01, 0.5])
def test_c8_max_of_two(p):
    cfg = SimConfig(ProbabilityTrace(p, (1.0, 1.0), ((), ())), protocol="none", cc_mode="no_cc", trials=100_000, seed=9)
    res = simulate_tau(cfg)
    assert abs(res.mean_tau / 2 - max_of_two_geometric_mean(p)) <= 3 * res.std_error / 2


# --- 9 ------------------------------------------------------------------------------


@pytest.mark.criterion(9, "classical-communication impact")
def test_c9_delta_property():
    rng = np.random.default_rng(9)
    space = SearchSpace(N_range=range(4), k_max=3)
    for _ in range(25):
        F0, pG, L = rng.uniform(0.85, 1.0), rng.uniform(0.95, 1.0), rng.uniform(100, 1500)
        c = cc_impact(F0, pG, link=LinkParams(L), space=space)
        assert 0.0 <= c.delta_rel < 1.0


@pytest.mark.criterion(9, "classical-communication impact")
def test_c9_long_link():
    c = cc_impact(0.96, 0.995, link=LinkParams(1280), space=SearchSpace())
    assert 0.0 <= c.delta_rel <= 0.55


# --- 10 -----------------------------------------------------------------------------

REPLAY = [
    ["evaluate", "--protocol", "deutsch", "--N", "2", "--k", "0,3,1"],
    ["optimize", "--nmax", "3", "--kmax", "3", "--workers", "2"],
    ["scan", "--F0", "0.85:1:3", "--pG", "0.95:1:3", "--nmax", "3", "--workers", "3"],
    ["partition", "--M", "4", "--nmax", "3", "--kmax", "2"],
    ["ccimpact", "--F0", "0.95", "--pG", "0.97:0.99:2", "--nmax", "2", "--workers", "2"],
    ["simulate", "--N", "1", "--k", "1,1", "--trials", "30000", "--seed", "10", "--workers", "3"],
]


@pytest.mark.criterion(10, "byte-identical re-runs from manifests")
@pytest.mark.parametrize("argv", REPLAY, ids=[a[0] for a in REPLAY])
@pytest.mark.parametrize("suffix", ["csv", "json"])
def test_c10_replay(tmp_path, argv, suffix):
    first, second = tmp_path / f"a.{suffix}", tmp_path / f"b.{suffix}"
    assert run(argv + ["--out", str(first)]) == 0
    assert run([argv[0], "--config", str(first), "--workers", "1", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
