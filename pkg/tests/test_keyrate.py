from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import entr

from qrepeater.keyrate import (
    RepeaterConfig,
    binary_entropy,
    evaluate,
    memories,
    memories_deutsch,
    memories_duer,
    rel_change,
    secret_fraction,
    state_secret_fraction,
    symmetric_threshold,
)
from qrepeater.noisy_ops import NoiseParams
from qrepeater.rates import LinkParams
from qrepeater.states import depolarized, error_rates

from conftest import bell_states


def h_ref(p):
    p = np.clip(p, 0.0, 1.0)
    return float((entr(p) + entr(1 - p)) / np.log(2))


def six_state_ref(ex, ey, ez):
    """One-way six-state secret fraction, using scipy's entropy kernel."""
    return (
        1
        - ez * h_ref((1 + (ex - ey) / ez) / 2)
        - (1 - ez) * h_ref((1 - (ex + ey + ez) / 2) / (1 - ez))
        - h_ref(ez)
    )


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(h_ref(0.11), rel=1e-14)


def test_perfect_pairs_give_one_bit():
    assert secret_fraction(0.0, 0.0, 0.0) == 1.0


def test_werner_fixture():
    # F = 0.95 gives e = 1/30 in every basis
    e = error_rates(depolarized(0.95))
    assert e == pytest.approx((1 / 30,) * 3, abs=1e-15)
    r = state_secret_fraction(depolarized(0.95))
    assert r == pytest.approx(six_state_ref(*e), rel=1e-12)
    assert r == pytest.approx(0.6343549178479858, rel=1e-12)


@given(bell_states())
def test_matches_reference(s):
    e = error_rates(s)
    if 1e-9 < e[2] < 1 - 1e-9:
        assert secret_fraction(*e) == pytest.approx(six_state_ref(*e), abs=1e-9)


def test_symmetric_threshold():
    e = symmetric_threshold()
    assert abs(e - 0.1262) <= 0.0005
    assert secret_fraction(e, e, e) == pytest.approx(0.0, abs=1e-12)
    assert secret_fraction(0.12, 0.12, 0.12) > 0 > secret_fraction(0.13, 0.13, 0.13)


def test_limits():
    assert secret_fraction(0.0, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        secret_fraction(-0.1, 0.0, 0.0)


def test_memory_counts():
    assert memories_deutsch((0, 0, 0)) == 1
    assert memories_deutsch((0, 3, 1)) == 16
    assert memories_deutsch((2, 0, 0, 0)) == 4
    assert memories_duer((2, 2), 1) == 3
    assert memories_duer((0, 1, 1, 1, 0), 4) == 4
    for N in range(6):
        assert memories_duer((3,) + (0,) * N, N) == 2
        assert memories_duer((0,) * (N + 1), N) == memories_deutsch((0,) * (N + 1)) == 1
    assert memories("none", (0, 0), 1) == 1
    with pytest.raises(OverflowError):
        memories_deutsch((63,))


def test_config_validation():
    with pytest.raises(ValueError):
        RepeaterConfig("none", LinkParams(600, 1), (0, 1))
    with pytest.raises(ValueError):
        RepeaterConfig("deutsch", LinkParams(600, 1), (0,))
    with pytest.raises(ValueError):
        RepeaterConfig("deutsch", LinkParams(600, 0), (0,), cc_mode="maybe")
    with pytest.raises(ValueError):
        RepeaterConfig("deutsch", LinkParams(600, 0), (0,), input_state="ghz")


def test_perfect_single_segment():
    link = LinkParams(600, 0)
    res = evaluate(RepeaterConfig("none", link, (0,), NoiseParams(1.0), 1.0))
    assert res.secret_fraction == 1.0
    assert res.key_rate == pytest.approx(link.P0 / (2 * link.T0), rel=1e-12)


def test_reference_key_rates():
    k2 = evaluate(RepeaterConfig("deutsch", LinkParams(600, 2), (0, 3, 1), NoiseParams(0.96), 0.9))
    assert k2.memories == 16
    assert k2.key_rate == pytest.approx(3.034629e-4, rel=1e-6)
    assert 3.03e-4 / 2 <= k2.key_rate <= 3.03e-4 * 2
    k3 = evaluate(RepeaterConfig("duer", LinkParams(600, 2), (0, 0, 0), NoiseParams(0.99), 0.97))
    assert 0.19 / 2 <= k3.key_rate <= 0.19 * 2


@given(st.floats(0.7, 1.0), st.floats(0.9, 1.0), st.integers(0, 3), st.sampled_from(["deutsch", "duer"]))
def test_key_rate_composition(F0, pG, N, protocol):
    cfg = RepeaterConfig(protocol, LinkParams(400, N), (1,) + (0,) * N, NoiseParams(pG, 0.9), F0)
    res = evaluate(cfg)
    assert res.key_rate >= 0.0
    if res.secret_fraction > 0:
        expected = res.repeater_rate * res.secret_fraction * 0.81 / res.memories
        assert res.key_rate == pytest.approx(expected, rel=1e-12)
    else:
        assert res.key_rate == 0.0


def test_doubling_memories_halves_key():
    cfg = RepeaterConfig("deutsch", LinkParams(600, 1), (1, 0), NoiseParams(0.98), 0.95)
    res = evaluate(cfg)
    assert res.repeater_rate * res.secret_fraction / (2 * res.memories) == pytest.approx(res.key_rate / 2, rel=1e-15)


@pytest.mark.parametrize("protocol, k", [("deutsch", (1, 2, 0)), ("duer", (2, 0, 1)), ("none", (0, 0, 0))])
@pytest.mark.parametrize("eta", [0.9, 0.5])
def test_detector_scaling_without_cc(protocol, k, eta):
    base = RepeaterConfig(protocol, LinkParams(600, 2), k, NoiseParams(0.99), 0.97, cc_mode="no_cc")
    lossy = replace(base, noise=NoiseParams(0.99, eta))
    ratio = evaluate(lossy).key_rate / evaluate(base).key_rate
    if protocol == "duer":
        # every pumping round also waits for a fresh pair, so the ratio is not a pure power
        assert ratio < eta ** 2
    else:
        assert ratio == pytest.approx(eta ** (2 * (2 + sum(k)) + 2), rel=1e-12)


def test_infinite_time_or_bad_state_give_zero():
    res = evaluate(RepeaterConfig("none", LinkParams(600, 3), (0,) * 4, NoiseParams(0.9), 0.8))
    assert res.secret_fraction < 0 and res.key_rate == 0.0


@pytest.mark.parametrize("a, b, expected", [(1.0, 1.0, 0.0), (2.0, 1.0, 0.5), (1.0, 2.0, -0.5), (0.0, 0.0, 0.0), (3.0, 0.0, 1.0)])
def test_rel_change(a, b, expected):
    assert rel_change(a, b) == expected


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_rel_change_antisymmetric_and_bounded(a, b):
    assert rel_change(a, b) == -rel_change(b, a)
    assert -1.0 <= rel_change(a, b) <= 1.0


@given(bell_states())
def test_secret_fraction_at_most_one(s):
    assert state_secret_fraction(s) <= 1.0 + 1e-12
