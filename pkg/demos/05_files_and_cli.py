"""
Scenario files, exports and the command line
============================================

Everything above can be driven from a small INI-style text file.
"""

# %%
import tempfile
from pathlib import Path

from satcon import export_csv, export_summary, parse_scenario, run
from satcon.cli import main

text = """
[scenario]
name = ring
[graph]
n = 4
edge = 1 2 1
edge = 2 3 1
edge = 3 4 1
edge = 4 1 1
[saturation]
levels = 1 2 2 3
[initial]
values = 2 -1 0.5 1.5
[sim]
dt = 0.001
t_end = 60
"""
scenario = parse_scenario(text)
traj, summary = run(scenario)
print("agreement with prediction:", summary.diagnostics.agreement_with_prediction)

# %%
out = Path(tempfile.mkdtemp())
export_csv(traj, out / "ring.csv")
export_summary(summary, out / "ring.summary.json")
print((out / "ring.summary.json").read_text()[:300])

# %%
# The same through the CLI; the exit status is 0 when every check agrees.
(out / "ring.scn").write_text(text)
print("exit status:", main(["run", str(out / "ring.scn")]))
