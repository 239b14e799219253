"""
Double integrators with saturated velocity outputs
==================================================

Positions follow velocities; velocities are driven by position differences
plus clipped velocity differences. Now the velocity average decides.
"""

# %%
import numpy as np

from satcon import harness
from satcon.analysis import disagreement
from satcon.scenario import builtin

for name in ("fig5", "fig6"):
    traj, summary = harness.run(builtin(name))
    print(f"{name}: mean velocity {summary.prediction.condition_value:+.2f}, predicted "
          f"{summary.prediction.consensus_expected}, final velocity spread "
          f"{disagreement(traj.velocities[-1]):.2e}")

# %%
# The total velocity never changes, so the group keeps drifting at that speed.
traj, _ = harness.run(builtin("fig5"))
print("average velocity at start and end:", np.round(traj.velocities[[0, -1]].mean(axis=1), 12))
