"""Consensus of multi-agent systems whose agents only see saturated states.

The package is split into four layers:

``satcon.graph``
    fixed graphs, switching schedules, connectivity and left eigenvectors
``satcon.dynamics``
    saturated single/double-integrator dynamics and the fixed-step integrator
``satcon.analysis``
    theorem predictions, Lyapunov functions and trajectory verification
``satcon.harness``
    scenario runs, CSV/JSON export and the randomized sweep
"""
from .analysis import (
    DiagnosticsReport,
    PredictionReport,
    damped_consensus_check,
    detect_consensus,
    predict_directed,
    predict_double,
    predict_fixed_undirected,
    predict_timevarying,
    verify,
    verify_proof_identities,
)
from .dynamics import SaturationSpec, SimConfig, SimulationError, Trajectory, saturate, simulate
from .graph import (
    Graph,
    GraphError,
    GraphSchedule,
    Segment,
    WeightFn,
    is_connected,
    is_integrally_connected,
    is_strongly_connected,
    laplacian,
    left_eigenvector,
    random_connected_graph,
)
from .harness import export_csv, export_summary, oracle_sweep, run
from .scenario import Scenario, ScenarioError, builtin, builtin_scenarios, format_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "DiagnosticsReport", "PredictionReport", "damped_consensus_check", "detect_consensus",
    "predict_directed", "predict_double", "predict_fixed_undirected", "predict_timevarying",
    "verify", "verify_proof_identities",
    "SaturationSpec", "SimConfig", "SimulationError", "Trajectory", "saturate", "simulate",
    "Graph", "GraphError", "GraphSchedule", "Segment", "WeightFn", "is_connected",
    "is_integrally_connected", "is_strongly_connected", "laplacian", "left_eigenvector",
    "random_connected_graph",
    "export_csv", "export_summary", "oracle_sweep", "run",
    "Scenario", "ScenarioError", "builtin", "builtin_scenarios", "format_scenario", "parse_scenario",
]
