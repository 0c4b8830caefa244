"""Spend a fixed number of quantum memories on parallel setups.

With M memories one can run a single large setup or several smaller ones
side by side. The best split is found by checking every way of writing M as
a sum of setup sizes.
"""

from qrepeater.optimizer import SearchSpace, optimize_fixed_memory

F0, pG = 0.97, 0.99
for protocol in ("deutsch", "duer"):
    space = SearchSpace(N_range=range(6), k_max=3, protocols=("none", protocol))
    print(protocol)
    for M in range(1, 7):
        part = optimize_fixed_memory(M, F0, pG, space=space)
        setups = ", ".join(f"{m}:{part.setups[m].k}" for m in part.parts)
        print(f"  M={M}  K={part.key_rate:.4f}  setups {setups}")
