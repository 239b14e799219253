"""Saturated consensus dynamics and a deterministic fixed-step integrator."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .graph import Graph, GraphSchedule, WeightFn

__all__ = [
    "SaturationSpec",
    "SimConfig",
    "Trajectory",
    "SimulationError",
    "saturate",
    "single_rhs",
    "double_rhs",
    "simulate",
]

MAX_SAMPLES = 20_000


class SimulationError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, t):
        super().__init__(f"non-finite state encountered at t = {t:.6g}")
        self.t = t


def saturate(x, s):
    """Clip ``x`` to ``[-s, s]``, i.e. ``sign(x) * min(|x|, s)``."""
    out = np.clip(x, -np.asarray(s), np.asarray(s))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class SaturationSpec:
    levels: np.ndarray

    def __post_init__(self):
        lv = np.array(self.levels, dtype=float, ndmin=1, copy=True)
        if lv.ndim != 1 or lv.size == 0:
            raise ValueError("saturation levels must be a non-empty vector")
        if not np.all(lv > 0) or not np.all(np.isfinite(lv)):
            raise ValueError(f"saturation levels must be positive and finite, got {lv}")
        lv.setflags(write=False)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def uniform(cls, s, n):
        return cls(np.full(n, float(s)))

    @property
    def n(self):
        return self.levels.size

    @property
    def min_level(self):
        return float(self.levels.min())

    def homogeneous(self):
        return bool(np.all(self.levels == self.levels[0]))

    def __call__(self, x):
        return np.clip(x, -self.levels, self.levels)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_end: float = 100.0
    method: str = "rk4"
    record_stride: Optional[int] = None  # None: pick so that at most MAX_SAMPLES are stored

    def __post_init__(self):
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if self.t_end / self.dt < 1:
            raise ValueError("t_end must cover at least one step")
        if self.method not in ("euler", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be a positive integer")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution; double-integrator rows are ``[x_1..x_N, v_1..v_N]``."""

    times: np.ndarray
    states: np.ndarray
    model: str = "single"
    dt: Optional[float] = None

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] != self.times.shape[0]:
            raise ValueError("states must have one row per sample time")
        if self.model not in ("single", "double"):
            raise ValueError(f"unknown model {self.model!r}")

    @property
    def n_agents(self):
        m = self.states.shape[1]
        return m // 2 if self.model == "double" else m

    @property
    def positions(self):
        return self.states[:, : self.n_agents]

    @property
    def velocities(self):
        if self.model != "double":
            raise AttributeError("single-integrator trajectories have no velocities")
        return self.states[:, self.n_agents:]

    @property
    def final(self):
        return self.states[-1]


def single_rhs(x, W, sat):
    """Right-hand side ``dx_i = sum_j W_ij (y_j - y_i)`` with ``y = sat(x)``."""
    x = np.asarray(x, dtype=float)
    W = np.asarray(W, dtype=float)
    levels = sat.levels if isinstance(sat, SaturationSpec) else np.asarray(sat, dtype=float)
    if W.shape != (x.size, x.size) or levels.size not in (1, x.size):
        raise ValueError(f"dimension mismatch: x {x.shape}, W {W.shape}, levels {levels.shape}")
    y = np.clip(x, -levels, levels)
    return W @ y - W.sum(axis=1) * y


def double_rhs(state, W, s):
    """Right-hand side for double integrators with saturated velocity measurements."""
    if isinstance(s, SaturationSpec):
        if not s.homogeneous():
            raise ValueError("double-integrator model requires homogeneous saturation levels")
        s = s.levels[0]
    state = np.asarray(state, dtype=float)
    W = np.asarray(W, dtype=float)
    n = state.size // 2
    if state.size != 2 * n or W.shape != (n, n):
        raise ValueError(f"dimension mismatch: state {state.shape}, W {W.shape}")
    x, v = state[:n], state[n:]
    y = np.clip(v, -s, s)
    dv = W @ (x + y) - W.sum(axis=1) * (x + y)
    return np.concatenate([v, dv])


# ---------------------------------------------------------------------------
# integration


def _edge_arrays(edges):
    """Flatten an edge dict into kernel arrays.

    When every edge has a mirror with the same weight function only the
    ``i < j`` half is kept and ``pairs`` is set.
    """
    if not edges:
        z = np.zeros(0)
        return np.zeros(0, np.int64), np.zeros(0, np.int64), z, z, z, False, False
    pairs = all(edges.get((j, i)) == fn for (i, j), fn in edges.items())
    keys = sorted(k for k in edges if not pairs or k[0] < k[1])
    rows = np.array([k[0] for k in keys], dtype=np.int64)
    cols = np.array([k[1] for k in keys], dtype=np.int64)
    c0 = np.array([edges[k].c0 for k in keys])
    cs = np.array([edges[k].c_sin for k in keys])
    cc = np.array([edges[k].c_cos for k in keys])
    varying = bool(np.any(cs != 0) or np.any(cc != 0))
    return rows, cols, c0, cs, cc, varying, pairs


def _graph_edges(g: Graph):
    i, j = np.nonzero(g.weights)
    return {(int(a), int(b)): WeightFn(float(g.weights[a, b])) for a, b in zip(i, j)}


def _pieces(net, t_end):
    """Yield ``(t_a, t_b, tshift, edge_arrays)`` covering ``[0, t_end]``."""
    if isinstance(net, Graph):
        yield 0.0, float(t_end), 0.0, _edge_arrays(_graph_edges(net))
        return
    if net.period is None and t_end > net.horizon:
        raise ValueError(f"t_end {t_end} beyond non-periodic schedule horizon {net.horizon}")
    arrays = [_edge_arrays(seg.edges) for seg in net.segments]
    t = 0.0
    m = 0
    while t < t_end:
        shift = m * net.cycle_length
        for seg, arr in zip(net.segments, arrays):
            b = min(shift + seg.end, t_end)
            if b > t:
                yield t, b, shift, arr
                t = b
            if t >= t_end:
                return
        m += 1


def _integrate(model, z0, net, levels, cfg: SimConfig, damping=None) -> Trajectory:
    n = net.n
    z = np.array(z0, dtype=float, copy=True)
    if z.size != (2 * n if model == "double" else n):
        raise ValueError(f"initial state has {z.size} entries, network has {n} nodes")
    levels = np.ascontiguousarray(levels, dtype=float)
    if levels.size != n:
        raise ValueError(f"{levels.size} saturation levels for {n} agents")
    if damping is None:
        d0 = ds = dc = np.zeros(n)
        damped = False
    else:
        if len(damping) != n:
            raise ValueError("need one damping function per agent")
        d0 = np.array([d.c0 for d in damping], dtype=float)
        ds = np.array([d.c_sin for d in damping], dtype=float)
        dc = np.array([d.c_cos for d in damping], dtype=float)
        damped = True

    pieces = list(_pieces(net, cfg.t_end))
    total = sum(max(1, math.ceil((b - a) / cfg.dt - 1e-9)) for a, b, _, _ in pieces)
    stride = cfg.record_stride or max(1, math.ceil(total / MAX_SAMPLES))
    cap = total // stride + 2
    out_t = np.empty(cap)
    out_z = np.empty((cap, z.size))
    out_t[0] = 0.0
    out_z[0] = z
    n_rec = 1
    steps = 0
    model_code = _kernels.DOUBLE if model == "double" else _kernels.SINGLE
    method_code = _kernels.RK4 if cfg.method == "rk4" else _kernels.EULER
    for a, b, shift, (rows, cols, c0, cs, cc, varying, pairs) in pieces:
        advance = _kernels.kernel(model_code, method_code, varying, damped, pairs)
        steps, n_rec, status, t_fail = advance(
            z, a, b, cfg.dt, rows, cols, c0, cs, cc, shift,
            levels, d0, ds, dc, stride, steps, out_t, out_z, n_rec,
        )
        if status != _kernels.OK:
            raise SimulationError(t_fail)
    if out_t[n_rec - 1] != cfg.t_end:
        out_t[n_rec] = cfg.t_end
        out_z[n_rec] = z
        n_rec += 1
    return Trajectory(out_t[:n_rec].copy(), out_z[:n_rec].copy(), model=model, dt=cfg.dt)


def simulate(model: str, x0, net: Union[Graph, GraphSchedule], sat: SaturationSpec,
             cfg: SimConfig = SimConfig()) -> Trajectory:
    """Integrate the saturated consensus dynamics from ``t = 0`` to ``cfg.t_end``.

    ``model`` is ``"single"`` (state ``x``) or ``"double"`` (state ``[x; v]``).
    Steps are shortened to land on every schedule switch time, so no RK4
    stage ever straddles a discontinuity of the weights.
    """
    if model not in ("single", "double"):
        raise ValueError(f"unknown model {model!r}")
    if sat.n != net.n:
        raise ValueError(f"{sat.n} saturation levels for a {net.n}-node network")
    if model == "double" and not sat.homogeneous():
        raise ValueError("double-integrator model requires homogeneous saturation levels")
    return _integrate(model, x0, net, sat.levels, cfg)
