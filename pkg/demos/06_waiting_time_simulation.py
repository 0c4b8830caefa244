"""Check the waiting-time recurrences against an event-level simulation.

The recurrences charge 3/2 times the single-pair time whenever two pairs are
needed. That is exact for exponential waiting times, which is what a single
level with a small link success probability produces. Once waits are nested,
the time of each level is no longer exponential and the simulation comes out
shorter.
"""

from qrepeater.keyrate import RepeaterConfig, evaluate
from qrepeater.mc_sim import SimConfig, simulate_tau
from qrepeater.noisy_ops import NoiseParams
from qrepeater.rates import LinkParams, ProbabilityTrace

cases = {
    "one link, one round": ("deutsch", ProbabilityTrace(0.005, (1.0,), ((0.68,),))),
    "one swap": ("none", ProbabilityTrace(0.01, (1.0, 1.0), ((), ()))),
    "two nested swaps": ("none", ProbabilityTrace(0.01, (1.0, 1.0, 1.0), ((), (), ()))),
}
chain = RepeaterConfig("deutsch", LinkParams(600, 2), (0, 3, 1), NoiseParams(0.96), 0.9)
cases["N=2, k=(0,3,1)"] = ("deutsch", evaluate(chain).trace)

for name, (protocol, trace) in cases.items():
    cfg = SimConfig(trace, protocol=protocol, trials=100_000, seed=1)
    sim = simulate_tau(cfg)
    rel = sim.mean_tau / cfg.analytic_tau - 1
    print(f"{name:22s} simulated {sim.mean_tau:10.1f} +- {sim.std_error:6.1f}   "
          f"recurrence {cfg.analytic_tau:10.1f}   {rel:+.1%}")
