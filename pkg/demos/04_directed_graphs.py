"""
Directed graphs and the weighted average
========================================

On a strongly connected digraph the conserved quantity is p @ x, where p is
the positive left null vector of the Laplacian.
"""

# %%
import numpy as np

from satcon import left_eigenvector, predict_directed, simulate
from satcon.scenario import builtin, fig10_graph

g = fig10_graph()
p = left_eigenvector(g)
print("p =", p.round(4))

# %%
for name in ("fig11a", "fig11b"):
    scn = builtin(name)
    sat, x0 = scn.resolve_saturation(), scn.resolve_initial()
    report = predict_directed(x0, sat, g)
    final = simulate("single", x0, g, sat, scn.sim).final
    print(f"{name}: p @ x0 = {report.condition_value:+.4f}, predicted {report.consensus_expected}, "
          f"final states {np.round(final, 4)}")
