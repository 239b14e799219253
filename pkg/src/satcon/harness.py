"""Scenario runner, file export and the randomized prediction-vs-simulation sweep."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .analysis import DiagnosticsReport, PredictionReport, verify
from .dynamics import SaturationSpec, SimConfig, Trajectory, simulate
from .graph import GraphSchedule, Segment, WeightFn, random_connected_graph
from .scenario import Scenario

__all__ = [
    "RunSummary",
    "predict",
    "run",
    "export_csv",
    "read_csv",
    "summary_dict",
    "export_summary",
    "REGIMES",
    "SweepRecord",
    "sweep_scenario",
    "oracle_sweep",
]


@dataclass(frozen=True)
class RunSummary:
    scenario: str
    model: str
    prediction: PredictionReport
    diagnostics: DiagnosticsReport
    wall_time: float
    steps: int
    dt: float
    t_end: float
    method: str
    samples: int


def predict(model, x0, net, sat) -> PredictionReport:
    """Dispatch to the prediction that matches the model and network type."""
    if model == "double":
        return analysis.predict_double(np.asarray(x0)[net.n:], sat, net)
    if isinstance(net, GraphSchedule):
        return analysis.predict_timevarying(x0, sat, net)
    if net.directed:
        return analysis.predict_directed(x0, sat, net)
    return analysis.predict_fixed_undirected(x0, sat, net)


def run(s: Scenario):
    """Resolve, predict, simulate and verify one scenario.

    Returns ``(trajectory, summary)``; prediction preconditions such as a
    disconnected graph propagate as :class:`GraphError`.
    """
    t0 = time.perf_counter()
    net = s.resolve_network()
    sat = s.resolve_saturation()
    x0 = s.resolve_initial(net)
    report = predict(s.model, x0, net, sat)
    traj = simulate(s.model, x0, net, sat, s.sim)
    diag = verify(traj, report, net, sat, tol=s.tol, window=s.window)
    steps = _step_count(net, s.sim)
    summary = RunSummary(s.name, s.model, report, diag, time.perf_counter() - t0,
                         steps, s.sim.dt, s.sim.t_end, s.sim.method, traj.times.size)
    return traj, summary


def _step_count(net, cfg):
    from .dynamics import _pieces

    return sum(max(1, math.ceil((b - a) / cfg.dt - 1e-9)) for a, b, _, _ in _pieces(net, cfg.t_end))


# ---------------------------------------------------------------------------
# files


def export_csv(traj: Trajectory, path):
    n = traj.n_agents
    header = ["t"] + [f"x_{i + 1}" for i in range(n)]
    if traj.model == "double":
        header += [f"v_{i + 1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for t, row in zip(traj.times, traj.states):
            fh.write(",".join(format(v, ".17g") for v in (t, *row)) + "\n")


def read_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in r] for r in reader], dtype=float)
    model = "double" if any(h.startswith("v_") for h in header) else "single"
    if rows.size == 0:
        rows = rows.reshape(0, len(header))
    return Trajectory(rows[:, 0].copy(), rows[:, 1:].copy(), model=model)


def _jsonable(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    raise TypeError(f"cannot serialise {type(v)}")


_PREDICTION_KEYS = ("consensus_expected", "condition_value", "threshold", "theorem", "decision_value",
                    "predicted_limit", "limit_lower", "limit_upper", "weights")
_DIAGNOSTIC_KEYS = ("consensus_observed", "consensus_value", "final_disagreement", "tolerance",
                    "average_drift", "lyapunov_violations", "lyapunov_worst",
                    "box_invariance_violations", "limit_match", "agreement_with_prediction")


def summary_dict(r: RunSummary) -> dict:
    """Ordered summary; wall time is left out so reruns compare byte-for-byte."""
    return {
        "scenario": r.scenario,
        "model": r.model,
        "prediction": {k: _jsonable(getattr(r.prediction, k)) for k in _PREDICTION_KEYS},
        "diagnostics": {k: _jsonable(getattr(r.diagnostics, k)) for k in _DIAGNOSTIC_KEYS},
        "integrator": {"method": r.method, "dt": r.dt, "t_end": r.t_end, "steps": r.steps, "samples": r.samples},
    }


def export_summary(r: RunSummary, path):
    Path(path).write_text(json.dumps(summary_dict(r), indent=2) + "\n")


# ---------------------------------------------------------------------------
# randomized sweep

REGIMES = ("fixed-homogeneous", "fixed-heterogeneous", "time-varying", "double", "directed")
AMBIGUITY_BAND = 0.05


@dataclass(frozen=True)
class SweepRecord:
    regime: str
    index: int
    n: int
    condition_value: float
    threshold: float
    expected: bool
    observed: bool
    drift: float
    lyapunov_violations: int
    box_invariance_violations: int
    limit_match: object
    wall_time: float

    @property
    def agree(self):
        return self.expected == self.observed


def _random_schedule(rng, n):
    base = random_connected_graph(n, rng.uniform(0.3, 0.7), seed=rng)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if base.weights[i, j] > 0]
    n_seg = int(rng.integers(2, 5))
    period = float(rng.uniform(5.0, 15.0))
    cuts = np.sort(rng.uniform(0.1, 0.9, n_seg - 1)) * period
    bounds = [0.0, *cuts.tolist(), period]
    edges = [dict() for _ in range(n_seg)]
    for i, j in pairs:
        for k in set(rng.integers(0, n_seg, size=int(rng.integers(1, 3))).tolist()):
            c0 = rng.uniform(1.0, 3.0)
            amp = rng.uniform(0.0, c0 - 0.5)
            phase = rng.uniform(0, 2 * np.pi)
            fn = WeightFn(c0, amp * np.cos(phase), amp * np.sin(phase))
            edges[k][(i, j)] = fn
            edges[k][(j, i)] = fn
    segs = tuple(Segment(bounds[k], bounds[k + 1], edges[k]) for k in range(n_seg))
    return GraphSchedule(n, segs, period=period, symmetric=True)


def _target(rng, thr):
    while True:
        cv = rng.uniform(-(thr + 2.0), thr + 2.0)
        if abs(abs(cv) - thr) >= AMBIGUITY_BAND:
            return cv


# agent-count ranges (inclusive) per regime; the switching and second-order
# regimes stay nearer the sizes of their reference experiments to bound runtime
SIZES = {
    "fixed-homogeneous": (3, 30),
    "fixed-heterogeneous": (3, 30),
    "time-varying": (3, 12),
    "double": (3, 20),
    "directed": (3, 30),
}


def sweep_scenario(regime, seed):
    """Random ``(model, x0, net, sat)`` for one regime."""
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; choose from {REGIMES}")
    rng = np.random.default_rng(seed)
    lo, hi = SIZES[regime]
    n = int(rng.integers(lo, hi + 1))
    model = "single"
    if regime in ("fixed-homogeneous", "fixed-heterogeneous"):
        net = random_connected_graph(n, rng.uniform(0.1, 0.5), (0.5, 2.0), seed=rng)
        hetero = regime == "fixed-heterogeneous"
    elif regime == "time-varying":
        net = _random_schedule(rng, n)
        hetero = bool(rng.integers(2))
    elif regime == "double":
        model = "double"
        net = random_connected_graph(n, rng.uniform(0.15, 0.5), (0.5, 2.0), seed=rng)
        hetero = False
    else:
        net = random_connected_graph(n, rng.uniform(0.2, 0.5), (0.5, 2.0), seed=rng, directed=True)
        hetero = bool(rng.integers(2))
    levels = rng.uniform(0.5, 5.0, n) if hetero else np.full(n, rng.uniform(0.5, 5.0))
    sat = SaturationSpec(levels)
    x0 = rng.uniform(-10.0, 10.0, 2 * n if model == "double" else n)
    part = x0[n:] if model == "double" else x0
    if regime == "directed":
        current = math.fsum(analysis.left_eigenvector(net) * part)
    else:
        current = math.fsum(part) / n
    part += _target(rng, sat.min_level) - current
    return model, x0, net, sat


def oracle_sweep(regime, count, seed=0, dt=1e-3, t_end=500.0, tol=1e-2, window=0.1):
    """Compare predicted and observed consensus on ``count`` random scenarios.

    Scenario ``k`` uses seed ``seed + k`` so any single case can be rerun.
    """
    cfg = SimConfig(dt=dt, t_end=t_end)
    out = []
    for k in range(count):
        t0 = time.perf_counter()
        model, x0, net, sat = sweep_scenario(regime, seed + k)
        report = predict(model, x0, net, sat)
        traj = simulate(model, x0, net, sat, cfg)
        diag = verify(traj, report, net, sat, tol=tol, window=window)
        out.append(SweepRecord(
            regime, k, net.n, report.condition_value, report.threshold,
            report.consensus_expected, diag.consensus_observed, diag.average_drift,
            diag.lyapunov_violations, diag.box_invariance_violations, diag.limit_match,
            time.perf_counter() - t0,
        ))
    return out
