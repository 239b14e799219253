"""Consensus predictions, Lyapunov functions and trajectory monitors.

The predictions are exact domain-of-attraction tests: consensus happens
iff the conserved (weighted) average lies within the smallest saturation
level. Everything else here checks simulated trajectories against those
predictions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .dynamics import SaturationSpec, SimConfig, Trajectory, _integrate
from .graph import (
    Graph,
    GraphError,
    GraphSchedule,
    WeightFn,
    DEFAULT_EPS,
    _simpson,
    integral_components,
    is_connected,
    is_integrally_connected,
    is_strongly_connected,
    left_eigenvector,
)

__all__ = [
    "PredictionReport",
    "DiagnosticsReport",
    "IdentityReport",
    "DampedReport",
    "predict_fixed_undirected",
    "predict_timevarying",
    "predict_double",
    "predict_directed",
    "lyapunov_fixed",
    "lyapunov_directed",
    "lyapunov_double",
    "rank_stats",
    "disagreement",
    "detect_consensus",
    "verify",
    "verify_proof_identities",
    "damped_consensus_check",
]

LYAP_ABS_SLACK = 1e-9
LYAP_REL_SLACK = 1e-6
BOX_SLACK_STEPS = 10


@dataclass(frozen=True, eq=False)
class PredictionReport:
    """Theorem verdict for one initial condition.

    ``predicted_limit`` holds a point prediction per agent, NaN where only
    the interval ``[limit_lower, limit_upper]`` is known.
    """

    consensus_expected: bool
    condition_value: float
    threshold: float
    theorem: str
    decision_value: Optional[float] = None
    predicted_limit: Optional[np.ndarray] = None
    limit_lower: Optional[np.ndarray] = None
    limit_upper: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None  # left eigenvector for the directed case


@dataclass(frozen=True)
class DiagnosticsReport:
    consensus_observed: bool
    consensus_value: Optional[float]
    final_disagreement: float
    tolerance: float
    average_drift: float
    lyapunov_violations: int
    lyapunov_worst: float
    box_invariance_violations: int
    limit_match: Optional[bool]
    agreement_with_prediction: bool


# ---------------------------------------------------------------------------
# predictions


def _mean(x):
    x = np.asarray(x, dtype=float)
    return math.fsum(x) / x.size


def _unachievable_limit(x0, levels, cv):
    """Point/interval predictions for an initial average beyond the threshold.

    Solved for ``cv > 0``; the negative case is the mirror image.
    """
    sign = 1.0 if cv > 0 else -1.0
    x = sign * np.asarray(x0, dtype=float)
    n = x.size
    s_min = levels.min()
    at_min = levels == s_min
    total = math.fsum(x)
    limit = np.full(n, np.nan)
    lower = np.full(n, s_min)
    if np.all(at_min):
        # agents starting inside the box stay there and end at the shared output
        inside = x <= s_min
        limit[inside] = s_min
        upper = np.where(inside, s_min, x.max())
    elif at_min.sum() == 1 and np.unique(levels).size == n:
        limit[~at_min] = s_min
        limit[at_min] = total - (n - 1) * s_min
        upper = limit.copy()
        lower = limit.copy()
    else:
        # tied minimum: the others still settle at s_min, the tied group shares the rest
        limit[~at_min] = s_min
        rest = total - (~at_min).sum() * s_min
        upper = np.where(at_min, rest - (at_min.sum() - 1) * s_min, s_min)
    if sign < 0:
        limit, lower, upper = -limit, -upper, -lower
    return limit, lower, upper


def _predict_average(x0, sat, theorem):
    x0 = np.asarray(x0, dtype=float)
    if x0.size != sat.n:
        raise ValueError(f"{x0.size} initial states for {sat.n} saturation levels")
    cv = _mean(x0)
    thr = sat.min_level
    expected = abs(cv) <= thr
    if expected:
        return PredictionReport(True, cv, thr, theorem, decision_value=cv)
    limit, lo, hi = _unachievable_limit(x0, sat.levels, cv)
    return PredictionReport(False, cv, thr, theorem, predicted_limit=limit, limit_lower=lo, limit_upper=hi)


def predict_fixed_undirected(x0, sat: SaturationSpec, g: Graph) -> PredictionReport:
    if g.directed:
        raise GraphError("predict_fixed_undirected expects an undirected graph")
    if not is_connected(g):
        raise GraphError("graph is not connected (is_connected is false); the consensus condition does not apply")
    return _predict_average(x0, sat, "theorem1")


def predict_timevarying(x0, sat: SaturationSpec, sched: GraphSchedule) -> PredictionReport:
    if not sched.symmetric:
        raise GraphError("predict_timevarying expects a symmetric schedule")
    if not is_integrally_connected(sched):
        comps = integral_components(sched)
        raise GraphError(f"schedule is not integrally connected; integral-graph components: {comps}")
    if sat.homogeneous():
        return _predict_average(x0, sat, "theorem2")
    if not sched.is_bounded():
        raise GraphError("heterogeneous levels need active weights bounded away from zero")
    return _predict_average(x0, sat, "theorem3")


def predict_double(v0, s, g: Graph) -> PredictionReport:
    """Velocity-average test for saturated double integrators.

    ``s`` may be a scalar level or a homogeneous :class:`SaturationSpec`.
    """
    if isinstance(s, SaturationSpec):
        if not s.homogeneous():
            raise ValueError("double-integrator prediction requires homogeneous saturation levels")
        s = float(s.levels[0])
    if g.directed or not is_connected(g):
        raise GraphError("double-integrator prediction needs an undirected connected graph")
    cv = _mean(v0)
    expected = abs(cv) <= s
    return PredictionReport(expected, cv, float(s), "double_integrator",
                            decision_value=cv if expected else None)


def predict_directed(x0, sat: SaturationSpec, g: Graph) -> PredictionReport:
    if not g.directed:
        raise GraphError("predict_directed expects a directed graph")
    if not is_strongly_connected(g):
        raise GraphError("graph is not strongly connected")
    p = left_eigenvector(g)
    x0 = np.asarray(x0, dtype=float)
    cv = math.fsum(p * x0)
    thr = sat.min_level
    expected = abs(cv) <= thr
    return PredictionReport(expected, cv, thr, "directed",
                            decision_value=cv if expected else None, weights=p)


# ---------------------------------------------------------------------------
# Lyapunov functions


def _integral_term(a, b, s):
    """Closed form of ``int_a^b (sat_s(w) - a) dw`` for ``|a| <= s``."""
    b = np.asarray(b, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), b.shape)
    inner = 0.5 * (b - a) ** 2
    above = 0.5 * (s - a) ** 2 + (s - a) * (b - s)
    below = 0.5 * (s + a) ** 2 + (s + a) * (-s - b)
    return np.where(b > s, above, np.where(b < -s, below, inner))


def _check_xstar(xstar, levels):
    if abs(xstar) > np.min(levels):
        raise ValueError(f"|x*| = {abs(xstar)} exceeds the smallest saturation level {np.min(levels)}")


def lyapunov_fixed(x, xstar, sat: SaturationSpec):
    """``V = 2 sum_i int_{x*}^{x_i} (sat_i(w) - x*) dw``; ``x`` may be a stack of states."""
    _check_xstar(xstar, sat.levels)
    return 2.0 * _integral_term(xstar, x, sat.levels).sum(axis=-1)


def lyapunov_directed(x, xstar, sat: SaturationSpec, p):
    _check_xstar(xstar, sat.levels)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("weights p must be positive")
    return 2.0 * (p * _integral_term(xstar, x, sat.levels)).sum(axis=-1)


def lyapunov_double(x, v, g):
    w = g.weights if isinstance(g, Graph) else np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    diff = x[..., :, None] - x[..., None, :]
    return 0.5 * (w * diff**2).sum(axis=(-2, -1)) + (v**2).sum(axis=-1)


# ---------------------------------------------------------------------------
# trajectory statistics


def rank_stats(x):
    """Descending order statistics ``M`` and their prefix sums ``S_1..S_N``.

    Ties keep the original index order.
    """
    x = np.asarray(x, dtype=float)
    order = np.argsort(-x, axis=-1, kind="stable")
    m = np.take_along_axis(x, order, axis=-1)
    return m, np.cumsum(m, axis=-1)


def disagreement(states):
    states = np.asarray(states, dtype=float)
    return states.max(axis=-1) - states.min(axis=-1)


def detect_consensus(traj: Trajectory, tol: float = 1e-3, window: float = 0.1):
    """Trailing-window consensus test.

    Returns ``(True, value)`` when the spread ``max - min`` stays below
    ``tol`` on every sample of the last ``window`` fraction. ``value`` is
    the mean of the final state (final velocities for double integrators).
    """
    if not tol > 0 or not 0 < window <= 1:
        raise ValueError("need tol > 0 and 0 < window <= 1")
    n_samples = traj.times.size
    if n_samples == 0:
        raise ValueError("empty trajectory")
    k = max(1, math.ceil(window * n_samples))
    tail = traj.positions[-k:]
    ok = bool(np.all(disagreement(tail) < tol))
    if traj.model == "double":
        ok = ok and bool(np.all(disagreement(traj.velocities[-k:]) < tol))
        value = _mean(traj.velocities[-1])
    else:
        value = _mean(traj.positions[-1])
    return (True, value) if ok else (False, None)


def _lyapunov_series(traj, report, net, sat):
    if traj.model == "double":
        return lyapunov_double(traj.positions, traj.velocities, net)
    if report.theorem == "directed":
        return lyapunov_directed(traj.positions, report.decision_value, sat, report.weights)
    return lyapunov_fixed(traj.positions, report.decision_value, sat)


def _monotone_violations(values):
    inc = np.diff(values) - (LYAP_ABS_SLACK + LYAP_REL_SLACK * np.abs(values[:-1]))
    bad = inc > 0
    return int(bad.sum()), float(inc[bad].max()) if bad.any() else 0.0


def box_invariance_violations(traj: Trajectory, sat: SaturationSpec, slack=None) -> int:
    """Count exits from the nested boxes ``|x_i| <= s_(k)`` after first entry.

    Agents are ranked by decreasing level; once the top ``k`` of them are
    all inside ``[-s_(k), s_(k)]`` they must stay there (up to ``slack``).
    """
    x = traj.positions
    if slack is None:
        slack = BOX_SLACK_STEPS * (traj.dt or 0.0)
    order = np.argsort(-sat.levels, kind="stable")
    count = 0
    for k in range(1, x.shape[1] + 1):
        idx = order[:k]
        s_k = sat.levels[order[k - 1]]
        inside = np.all(np.abs(x[:, idx]) <= s_k, axis=1)
        hits = np.flatnonzero(inside)
        if hits.size == 0:
            continue
        later = x[hits[0]:, idx]
        count += int(np.any(np.abs(later) > s_k + slack, axis=1).sum())
    return count


def _conserved_drift(traj, report):
    if traj.model == "double":
        series = traj.velocities.mean(axis=1)
    elif report.theorem == "directed":
        series = traj.positions @ report.weights
    else:
        series = traj.positions.mean(axis=1)
    return float(np.max(np.abs(series - series[0])))


def verify(traj: Trajectory, report: PredictionReport, net, sat: SaturationSpec,
           tol: float = 1e-3, window: float = 0.1) -> DiagnosticsReport:
    """Cross-check a simulated trajectory against its prediction."""
    if (traj.model == "double") != (report.theorem == "double_integrator"):
        raise ValueError(f"{traj.model} trajectory does not match a {report.theorem} report")
    observed, value = detect_consensus(traj, tol, window)
    final = traj.final
    spread = float(disagreement(traj.positions[-1]))
    if traj.model == "double":
        spread = max(spread, float(disagreement(traj.velocities[-1])))

    violations, worst = 0, 0.0
    if report.consensus_expected:
        violations, worst = _monotone_violations(_lyapunov_series(traj, report, net, sat))
    box = box_invariance_violations(traj, sat) if traj.model == "single" else 0

    limit_match = None
    if report.predicted_limit is not None and traj.model == "single":
        slack = 10 * tol
        pts = ~np.isnan(report.predicted_limit)
        x_end = final[: traj.n_agents]
        limit_match = bool(
            np.all(np.abs(x_end[pts] - report.predicted_limit[pts]) <= slack)
            and np.all(x_end >= report.limit_lower - slack)
            and np.all(x_end <= report.limit_upper + slack)
        )
    agree = observed == report.consensus_expected and limit_match is not False
    return DiagnosticsReport(
        consensus_observed=observed,
        consensus_value=value,
        final_disagreement=spread,
        tolerance=tol,
        average_drift=_conserved_drift(traj, report),
        lyapunov_violations=violations,
        lyapunov_worst=worst,
        box_invariance_violations=box,
        limit_match=limit_match,
        agreement_with_prediction=bool(agree),
    )


# ---------------------------------------------------------------------------
# algebraic identities used by the convergence proofs


@dataclass
class IdentityReport:
    samples: int
    failures: dict = field(default_factory=dict)
    worst: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self):
        return not any(self.failures.values())


def _gauss_integral(a, b, s):
    """Gauss-Legendre quadrature of ``sat_s(w) - a`` over ``[a, b]``, split at the kinks."""
    nodes, wts = np.polynomial.legendre.leggauss(3)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    cuts = np.stack([lo, np.clip(-s, lo, hi), np.clip(s, lo, hi), hi], axis=-1)
    total = np.zeros_like(a)
    for k in range(3):
        left, right = cuts[:, k], cuts[:, k + 1]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        w = mid[:, None] + half[:, None] * nodes
        total += half * ((np.clip(w, -s[:, None], s[:, None]) - a[:, None]) @ wts)
    return np.where(b >= a, total, -total)


def verify_proof_identities(g: Graph, samples: int = 1000, seed: int = 0,
                            rtol: float = 1e-10) -> IdentityReport:
    """Check the proof identities on random draws.

    Undirected graphs get the symmetric double-sum identity; directed graphs
    get the left-eigenvector-weighted identity (undirected graphs use
    uniform weights there). Relative errors are measured against the sum
    of absolute terms so cancellation cannot hide a failure.
    """
    rng = np.random.default_rng(seed)
    n = g.n
    w = g.weights
    rep = IdentityReport(samples)
    names = ("double_sum", "weighted_double_sum", "integral_positive", "integral_quadrature", "passivity")
    for name in names:
        rep.failures[name] = 0
        rep.worst[name] = 0.0

    def record(name, err, bad, draw):
        rep.worst[name] = max(rep.worst[name], float(err))
        if bad:
            rep.failures[name] += 1
            if len(rep.counterexamples) < 20:
                rep.counterexamples.append((name, draw))

    p = left_eigenvector(g) if g.directed else np.full(n, 1.0 / n)
    for k in range(samples):
        a = rng.uniform(-10, 10, n)
        b = rng.uniform(-10, 10, n)
        da = a[:, None] - a[None, :]
        db = b[:, None] - b[None, :]
        if not g.directed:
            lhs = (w * da * db).sum()
            rhs = 2.0 * (w * a[:, None] * db).sum()
            scale = (w * np.abs(da * db)).sum() + 2.0 * (w * np.abs(a[:, None] * db)).sum()
            err = abs(lhs - rhs) / max(scale, 1e-300)
            record("double_sum", err, err > rtol, k)
        pw = p[:, None] * w
        lhs = 2.0 * (pw * a[:, None] * da).sum()
        rhs = (pw * da**2).sum()
        scale = 2.0 * (pw * np.abs(a[:, None] * da)).sum() + rhs
        err = abs(lhs - rhs) / max(scale, 1e-300)
        record("weighted_double_sum", err, err > rtol, k)

    s = rng.uniform(0.1, 5.0, samples)
    a = rng.uniform(-1, 1, samples) * s
    b = rng.uniform(-3, 3, samples) * s
    b[: max(1, samples // 100)] = a[: max(1, samples // 100)]  # equality cases
    closed = _integral_term(a, b, s)
    quad = _gauss_integral(a, b, s)
    for k in range(samples):
        positive_ok = closed[k] > 0 if a[k] != b[k] else closed[k] == 0
        record("integral_positive", 0.0 if positive_ok else 1.0, not positive_ok, k)
        err = abs(closed[k] - quad[k]) / max(1.0, abs(closed[k]))
        record("integral_quadrature", err, err > 1e-8, k)

    u = rng.uniform(-10, 10, samples)
    v = rng.uniform(-10, 10, samples)
    prod = (u - v) * (np.clip(u, -s, s) - np.clip(v, -s, s))
    for k in range(samples):
        record("passivity", max(0.0, -prod[k]), prod[k] < 0, k)
    return rep


# ---------------------------------------------------------------------------
# linear consensus with damping (used in the heterogeneous convergence argument)


@dataclass(frozen=True, eq=False)
class DampedReport:
    epoch_times: np.ndarray
    epoch_disagreement: np.ndarray
    epoch_norm: np.ndarray
    final_state: np.ndarray
    diverging_damping: bool
    final_norm: float
    final_disagreement: float
    converged_to_origin: Optional[bool]


def damped_consensus_check(net: Union[Graph, GraphSchedule], damping: Sequence[WeightFn],
                           x0, cfg: SimConfig, epoch: Optional[float] = None) -> DampedReport:
    """Simulate ``dx_i = sum_j a_ij(t)(x_j - x_i) - d_i(t) x_i`` and summarise it per epoch.

    Epochs default to the schedule period (one time unit for a fixed graph).
    """
    n = net.n
    damping = [d if isinstance(d, WeightFn) else WeightFn(float(d)) for d in damping]
    if len(damping) != n:
        raise ValueError(f"need {n} damping functions, got {len(damping)}")
    if any(not d.is_zero() and d.lower_bound() < 0 for d in damping):
        raise ValueError("damping must be nonnegative")
    if isinstance(net, GraphSchedule):
        if not is_integrally_connected(net):
            raise GraphError("damped consensus check needs an integrally connected schedule")
        epoch = epoch or net.cycle_length
        period = net.cycle_length
    else:
        if net.directed or not is_connected(net):
            raise GraphError("damped consensus check needs an undirected connected graph")
        epoch = epoch or 1.0
        period = 2 * math.pi
    # a nonnegative weight with a positive per-period integral has a diverging integral
    diverging = any(_simpson(d, 0.0, period) > DEFAULT_EPS for d in damping)
    traj = _integrate("single", x0, net, np.full(n, np.inf), cfg, damping=damping)
    marks = np.arange(0.0, cfg.t_end + 0.5 * epoch, epoch)
    idx = np.clip(np.searchsorted(traj.times, marks - 1e-12), 0, traj.times.size - 1)
    snap = traj.states[idx]
    final = traj.final
    fnorm = float(np.linalg.norm(final))
    return DampedReport(
        epoch_times=traj.times[idx],
        epoch_disagreement=disagreement(snap),
        epoch_norm=np.linalg.norm(snap, axis=1),
        final_state=final,
        diverging_damping=diverging,
        final_norm=fnorm,
        final_disagreement=float(disagreement(final)),
        converged_to_origin=(fnorm < 1e-3) if diverging else None,
    )
