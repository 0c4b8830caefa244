"""Search for the best distillation vector at every nesting level.

For each protocol and each N we enumerate every vector with at most three
rounds per level and keep the one with the highest key rate per memory.
Two hardware settings are compared: a noisier one, where recurrence
distillation wins, and a cleaner one, where cheap pumping setups dominate.
"""

from qrepeater.optimizer import SearchSpace, optimize, optimize_table

SPACE = SearchSpace(N_range=range(5), k_max=3)

for F0, pG in [(0.9, 0.96), (0.97, 0.99)]:
    print(f"F0 = {F0}, p_G = {pG}")
    table = optimize_table(F0, pG, space=SPACE)
    for protocol in ("deutsch", "duer"):
        for N in SPACE.N_range:
            opt = table[(protocol, N)]
            if opt.no_key:
                print(f"  {protocol:8s} N={N}  no key")
            else:
                print(f"  {protocol:8s} N={N}  K={opt.key_rate:.3e}  k={opt.k}  M={opt.memories}")
    best = optimize(F0, pG, space=SPACE)
    print(f"  overall best: {best.protocol} N={best.N} k={best.k} ({best.strategy}), K={best.key_rate:.3e}\n")
