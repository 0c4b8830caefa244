"""Map the optimal key rate over initial fidelity and gate quality.

A coarse grid is enough to see the shape: no key at low fidelity and poor
gates, plain swapping once both are nearly perfect, and distillation in
between. Cells are printed as log10 of the key rate per memory; '.' marks
cells below 1e-10 bits/s.
"""

import numpy as np

from qrepeater.optimizer import SearchSpace, axis, grid_scan

F0s = axis(0.7, 1.0, 7)
pGs = axis(0.92, 1.0, 9)
space = SearchSpace(N_range=range(6), k_max=4, strategies=("alpha", "beta"))
cells = grid_scan(F0s, pGs, space=space, workers=4)
grid = np.array([c.optimum.key_rate for c in cells]).reshape(len(F0s), len(pGs))
label = {"none": "-", "deutsch": "D", "duer": "P", None: " "}

print("p_G:      " + " ".join(f"{p:6.3f}" for p in pGs))
for i, F0 in reversed(list(enumerate(F0s))):
    row = []
    for j in range(len(pGs)):
        K = grid[i, j]
        row.append("     ." if K < 1e-10 else f"{np.log10(K):6.1f}")
    print(f"F0={F0:.3f}  " + " ".join(row))

print("\nwinning protocol (- plain swapping, D recurrence, P pumping):")
for i, F0 in reversed(list(enumerate(F0s))):
    marks = [label[cells[i * len(pGs) + j].optimum.protocol] for j in range(len(pGs))]
    print(f"F0={F0:.3f}  " + "      ".join(marks))
