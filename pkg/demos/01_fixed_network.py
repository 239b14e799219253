"""
Consensus with saturated outputs on a fixed network
===================================================

Fifty agents on a random connected graph, each reporting its state through a
clip at +/-1. Whether they agree depends on one number: the initial average.
"""

# %%
# Two starting points that differ only by a constant shift.
import numpy as np

from satcon import Graph, SaturationSpec, SimConfig, predict_fixed_undirected, simulate
from satcon.analysis import disagreement

from satcon.scenario import builtin

inside = builtin("fig2a")    # average -0.9821, inside [-1, 1]
outside = builtin("fig2b")   # average  1.3060, outside

# %%
# The prediction needs only the initial states and the smallest level.
for scn in (inside, outside):
    g, sat, x0 = scn.resolve_network(), scn.resolve_saturation(), scn.resolve_initial()
    report = predict_fixed_undirected(x0, sat, g)
    traj = simulate("single", x0, g, sat, scn.sim)
    print(f"{scn.name}: average {report.condition_value:+.4f}, predicted consensus "
          f"{report.consensus_expected}, final spread {disagreement(traj.final):.2e}")

# %%
# Outside the threshold the agents stall at an unachievable equilibrium:
# every output reads 1, yet states above 1 never come down.
traj = simulate("single", outside.resolve_initial(), outside.resolve_network(),
                outside.resolve_saturation(), outside.sim)
print("smallest final state:", traj.final.min().round(6), " largest:", traj.final.max().round(3))

# %%
# Heterogeneous levels: the agent with the smallest level absorbs the excess.
levels = SaturationSpec([3.0, 2.0, 1.0])
path = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
x0 = np.array([4.0, 3.0, 2.0])
report = predict_fixed_undirected(x0, levels, path)
final = simulate("single", x0, path, levels, SimConfig(dt=1e-3, t_end=100)).final
print("predicted limit", report.predicted_limit, " simulated", final.round(6))
