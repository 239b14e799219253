"""
A network that is never connected at any instant
================================================

Four agents; only one link is alive at a time and its weight oscillates.
Over a full period, though, the links add up to a connected graph.
"""

# %%
import numpy as np

from satcon import SaturationSpec, SimConfig, is_connected, simulate
from satcon.analysis import disagreement, predict_timevarying
from satcon.graph import Graph, integral_graph, weights_at
from satcon.scenario import fig7_schedule

schedule = fig7_schedule()
for t in (1.0, 4.0, 8.0):
    print(f"t = {t}: connected right now? {is_connected(Graph(weights_at(schedule, t)))}")
print("integral graph edges:", [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(np.triu(integral_graph(schedule).weights)))])

# %%
# Same test as for fixed graphs: compare the initial average with the smallest level.
x0 = np.array([3.0, -4.5, 1.0, -2.5])  # average -0.75
for levels in ([1.0] * 4, [1.0, 2.0, 3.0, 4.0]):
    sat = SaturationSpec(levels)
    for shift in (0.0, 2.0):
        start = x0 + shift
        report = predict_timevarying(start, sat, schedule)
        traj = simulate("single", start, schedule, sat, SimConfig(dt=1e-3, t_end=400))
        print(f"levels {levels}, average {report.condition_value:+.2f}: predicted "
              f"{report.consensus_expected}, final spread {disagreement(traj.final):.1e}")
