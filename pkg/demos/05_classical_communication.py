"""How much do acknowledgment messages cost?

Every swap and distillation round waits for classical messages to travel
between stations. Dropping those delays gives an upper bound on the key
rate; the relative change tells how much the messaging costs at each
distance.
"""

from qrepeater.optimizer import SearchSpace, cc_impact
from qrepeater.rates import LinkParams

space = SearchSpace(N_range=range(5), k_max=3)
print("   L km   K with msgs   K without    rel. change   winner with msgs")
for L in (100, 300, 600, 900, 1280):
    c = cc_impact(0.96, 0.995, link=LinkParams(L), space=space)
    w = c.with_cc
    print(f"{L:7.0f}   {w.key_rate:.4e}   {c.no_cc.key_rate:.4e}   {c.delta_rel:10.3f}   {w.protocol} N={w.N} k={w.k}")
