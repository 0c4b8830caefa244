"""Follow one repeater chain from elementary pairs to a secret key.

We take a 600 km link split into four segments (nesting level N=2), Werner
pairs of fidelity 0.9 and gates that work 96% of the time. The recurrence
protocol runs three rounds after the first swap and one after the second.
"""

from qrepeater import LinkParams, NoiseParams, RepeaterConfig, evaluate
from qrepeater.states import error_rates

cfg = RepeaterConfig(
    protocol="deutsch",
    link=LinkParams(L=600, N=2),
    k=(0, 3, 1),
    noise=NoiseParams(p_G=0.96),
    F0=0.9,
)
res = evaluate(cfg)
trace = res.trace

print(f"segment length {cfg.link.L0:.0f} km, T0 = {cfg.link.T0 * 1e3:.2f} ms, P0 = {cfg.link.P0:.3e}")

# The trace records the state after every swap and every distillation round.
for n, (states, probs) in enumerate(zip(trace.states, trace.p_d)):
    line = " -> ".join(f"{s.fidelity:.4f}" for s in states)
    rounds = ", ".join(f"{p:.3f}" for p in probs) or "none"
    print(f"level {n}: fidelity {line}   round success {rounds}")

ex, ey, ez = error_rates(trace.final_state)
print(f"final error rates: X {ex:.4f}  Y {ey:.4f}  Z {ez:.4f}")
print(f"waiting time {res.tau:.1f} T0  ->  {res.repeater_rate:.4f} pairs/s")
print(f"secret fraction {res.secret_fraction:.4f} bits/pair, {res.memories} memories")
print(f"key rate per memory: {res.key_rate:.3e} bits/s")

# Without distillation the same chain delivers pairs too noisy for a key.
plain = evaluate(RepeaterConfig("none", cfg.link, (0, 0, 0), cfg.noise, cfg.F0))
print(f"\nwithout distillation: fidelity {plain.final_state.fidelity:.4f}, "
      f"secret fraction {plain.secret_fraction:.4f}, key rate {plain.key_rate:.1e}")
