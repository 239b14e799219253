"""Weighted graphs, Laplacians and piecewise time-varying schedules.

Node indices are 0-based everywhere in the API. Weight ``weights[i, j]``
is the weight with which agent ``i`` listens to agent ``j``, so the row
sums of the adjacency matrix give the in-degrees used by the Laplacian.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Graph",
    "WeightFn",
    "Segment",
    "GraphSchedule",
    "GraphError",
    "laplacian",
    "is_connected",
    "is_strongly_connected",
    "left_eigenvector",
    "laplacian_spectrum",
    "weights_at",
    "integral_graph",
    "is_integrally_connected",
    "random_connected_graph",
]

DEFAULT_EPS = 1e-9
SIMPSON_PANELS = 1000


class GraphError(ValueError):
    """Raised for invalid graphs or graphs that violate an operation's precondition."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Fixed weighted graph on ``n`` nodes.

    ``weights`` is copied, validated and made read-only at construction.
    """

    weights: np.ndarray
    directed: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise GraphError(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise GraphError("weights must be finite")
        if np.any(np.diag(w) != 0):
            raise GraphError("weights must have a zero diagonal")
        if np.any(w < 0):
            raise GraphError("weights must be nonnegative")
        if not self.directed and not np.array_equal(w, w.T):
            raise GraphError("undirected graph requires symmetric weights")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n, edges, directed=False):
        """Build from ``(i, j, w)`` triples; undirected edges are mirrored."""
        w = np.zeros((n, n))
        for i, j, a in edges:
            w[i, j] = a
            if not directed:
                w[j, i] = a
        return cls(w, directed=directed)

    @classmethod
    def from_laplacian(cls, lap, directed=True):
        lap = np.asarray(lap, dtype=float)
        w = -lap.copy()
        np.fill_diagonal(w, 0.0)
        w[w == 0] = 0.0  # drop negative zeros
        g = cls(w, directed=directed)
        if not np.allclose(np.diag(lap), w.sum(axis=1)):
            raise GraphError("Laplacian rows do not sum to zero")
        return g

    def as_directed(self) -> "Graph":
        return Graph(self.weights, directed=True)


def laplacian(g: Graph) -> np.ndarray:
    """Return ``L = diag(A 1) - A`` with rows summing to zero exactly."""
    a = g.weights
    lap = -a.copy()
    lap[lap == 0] = 0.0
    np.fill_diagonal(lap, 0.0)
    np.fill_diagonal(lap, -lap.sum(axis=1))
    return lap


def _n_components(g: Graph, connection: str) -> int:
    if g.n == 1:
        return 1
    n_comp, _ = connected_components(g.weights > 0, directed=g.directed, connection=connection)
    return n_comp


def is_connected(g: Graph) -> bool:
    if g.directed:
        raise GraphError("is_connected expects an undirected graph; use is_strongly_connected")
    return _n_components(g, "weak") == 1


def is_strongly_connected(g: Graph) -> bool:
    if not g.directed:
        raise GraphError("is_strongly_connected expects a directed graph")
    return _n_components(g, "strong") == 1


def left_eigenvector(g: Graph) -> np.ndarray:
    """Positive left null vector of the Laplacian, normalised to sum 1.

    The null space of ``L.T`` is taken from an SVD; it must be
    one-dimensional, which holds exactly when the digraph has a single
    closed strongly connected class. Positivity of every entry is then
    checked separately.
    """
    if not g.directed:
        raise GraphError("left_eigenvector expects a directed graph")
    lap = laplacian(g)
    if g.n == 1:
        return np.ones(1)
    scale = max(np.linalg.norm(lap), 1.0)
    ns = scipy.linalg.null_space(lap.T, rcond=1e-10)
    if ns.shape[1] != 1:
        raise GraphError(
            f"Laplacian left null space has dimension {ns.shape[1]}; graph is not strongly connected"
        )
    p = ns[:, 0]
    p = p * np.sign(p[np.argmax(np.abs(p))])
    p = p / p.sum()
    if np.any(p <= 0):
        raise GraphError(f"left eigenvector has nonpositive entries {p}; graph is not strongly connected")
    resid = np.linalg.norm(p @ lap)
    if resid > 1e-10 * scale:
        raise GraphError(f"left eigenvector residual {resid:.3e} too large")
    return p


def laplacian_spectrum(g: Graph) -> np.ndarray:
    """Ascending Laplacian eigenvalues of an undirected graph."""
    if g.directed:
        raise GraphError("laplacian_spectrum expects an undirected graph")
    return np.linalg.eigvalsh(laplacian(g))


# ---------------------------------------------------------------------------
# time-varying schedules


@dataclass(frozen=True)
class WeightFn:
    """Edge weight ``c0 + c_sin*sin(t) + c_cos*cos(t)``."""

    c0: float
    c_sin: float = 0.0
    c_cos: float = 0.0

    def __post_init__(self):
        for name in ("c0", "c_sin", "c_cos"):
            if not math.isfinite(getattr(self, name)):
                raise GraphError(f"WeightFn.{name} must be finite")
        if not self.is_zero() and self.lower_bound() < 0:
            raise GraphError(
                f"weight {self.c0} + {self.c_sin}*sin + {self.c_cos}*cos can become negative"
            )

    @property
    def amplitude(self) -> float:
        return math.hypot(self.c_sin, self.c_cos)

    def lower_bound(self) -> float:
        return self.c0 - self.amplitude

    def upper_bound(self) -> float:
        return self.c0 + self.amplitude

    def is_zero(self) -> bool:
        return self.c0 == 0 and self.c_sin == 0 and self.c_cos == 0

    def __call__(self, t):
        return self.c0 + self.c_sin * np.sin(t) + self.c_cos * np.cos(t)


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    edges: Mapping[tuple, WeightFn] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class GraphSchedule:
    """Piecewise graph: each segment holds a sparse ``(i, j) -> WeightFn`` map.

    With ``period`` set, the segments tile ``[0, period)`` and the whole
    pattern repeats; weight functions are evaluated at the period-reduced
    time. Otherwise the segments tile ``[0, horizon]``.
    """

    n: int
    segments: tuple
    period: Optional[float] = None
    symmetric: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise GraphError("schedule needs at least one node")
        segs = tuple(
            s if isinstance(s, Segment) else Segment(float(s[0]), float(s[1]), dict(s[2]))
            for s in self.segments
        )
        if not segs:
            raise GraphError("schedule needs at least one segment")
        if segs[0].start != 0:
            raise GraphError(f"first segment must start at 0, got {segs[0].start}")
        for k, s in enumerate(segs):
            if not s.end > s.start:
                raise GraphError(f"segment {k} has end {s.end} <= start {s.start}")
            if k and s.start != segs[k - 1].end:
                kind = "overlaps" if s.start < segs[k - 1].end else "leaves a gap after"
                raise GraphError(f"segment {k} (start {s.start}) {kind} segment {k - 1} (end {segs[k - 1].end})")
            for (i, j), fn in s.edges.items():
                if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                    raise GraphError(f"segment {k}: invalid edge ({i}, {j}) for n={self.n}")
                if not isinstance(fn, WeightFn):
                    raise GraphError(f"segment {k}: edge ({i}, {j}) weight must be a WeightFn")
                if self.symmetric and s.edges.get((j, i)) != fn:
                    raise GraphError(f"segment {k}: symmetric schedule lacks matching edge ({j}, {i})")
        if self.period is not None:
            if not self.period > 0:
                raise GraphError("period must be positive")
            if segs[-1].end != self.period:
                raise GraphError(f"segments end at {segs[-1].end}, expected period {self.period}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_starts", [s.start for s in segs])

    @property
    def horizon(self) -> float:
        return math.inf if self.period is not None else self.segments[-1].end

    @property
    def cycle_length(self) -> float:
        return self.segments[-1].end

    @classmethod
    def from_graph(cls, g: Graph, period: float = 1.0) -> "GraphSchedule":
        """One-segment periodic schedule with constant weights."""
        edges = {(i, j): WeightFn(float(g.weights[i, j])) for i, j in zip(*np.nonzero(g.weights))}
        return cls(g.n, (Segment(0.0, period, edges),), period=period, symmetric=not g.directed)

    def locate(self, t: float):
        """Return ``(segment_index, reduced_time)`` with right-continuous boundaries."""
        if t < 0:
            raise GraphError(f"time must be nonnegative, got {t}")
        if self.period is not None:
            tau = t - math.floor(t / self.period) * self.period
            if tau >= self.period:  # rounding at the wrap point
                tau = 0.0
        else:
            if t > self.horizon:
                raise GraphError(f"time {t} beyond schedule horizon {self.horizon}")
            tau = t
        k = bisect.bisect_right(self._starts, tau) - 1
        return min(k, len(self.segments) - 1), tau

    def is_bounded(self) -> bool:
        """Every active weight stays inside a positive band ``[a_min, a_max]``."""
        return all(
            fn.is_zero() or fn.lower_bound() > 0 for s in self.segments for fn in s.edges.values()
        )


def weights_at(s: GraphSchedule, t: float) -> np.ndarray:
    k, tau = s.locate(t)
    w = np.zeros((s.n, s.n))
    for (i, j), fn in s.segments[k].edges.items():
        w[i, j] = fn(tau)
    return w


def _simpson(fn: WeightFn, a: float, b: float, panels: int = SIMPSON_PANELS) -> float:
    t = np.linspace(a, b, 2 * panels + 1)
    y = fn(t)
    h = (b - a) / (2 * panels)
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


def period_integrals(s: GraphSchedule) -> np.ndarray:
    """Composite-Simpson integral of every weight over one period."""
    if s.period is None:
        raise GraphError(
            "integral connectivity is a limit notion; it is only decidable here for periodic schedules"
        )
    total = np.zeros((s.n, s.n))
    for seg in s.segments:
        for (i, j), fn in seg.edges.items():
            total[i, j] += _simpson(fn, seg.start, seg.end)
    return total


def integral_graph(s: GraphSchedule, eps: float = DEFAULT_EPS) -> Graph:
    """Unit-weight graph of edges whose per-period weight integral exceeds ``eps``.

    A positive integral over one period makes the integral over
    ``[0, inf)`` diverge, so these are exactly the integral-graph edges.
    """
    if not eps > 0:
        raise GraphError("eps must be positive")
    ints = period_integrals(s)
    present = (ints > eps) | (ints.T > eps)
    w = present.astype(float)
    np.fill_diagonal(w, 0.0)
    return Graph(w, directed=False)


def is_integrally_connected(s: GraphSchedule, eps: float = DEFAULT_EPS) -> bool:
    return is_connected(integral_graph(s, eps))


def integral_components(s: GraphSchedule, eps: float = DEFAULT_EPS) -> list:
    g = integral_graph(s, eps)
    _, labels = connected_components(g.weights > 0, directed=False)
    return [sorted(np.flatnonzero(labels == c).tolist()) for c in np.unique(labels)]


def random_connected_graph(n, edge_prob, weight_range=(1.0, 1.0), seed=None,
                           directed=False, max_tries=1000) -> Graph:
    """Erdos-Renyi graph, redrawn until (strongly) connected."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    lo, hi = weight_range
    for _ in range(max_tries):
        mask = rng.random((n, n)) < edge_prob
        np.fill_diagonal(mask, False)
        if not directed:
            mask = np.triu(mask, 1)
        w = np.where(mask, rng.uniform(lo, hi, size=(n, n)), 0.0)
        if not directed:
            w = w + w.T
        g = Graph(w, directed=directed)
        ok = is_strongly_connected(g) if directed else is_connected(g)
        if ok:
            return g
    raise GraphError(f"no connected graph found after {max_tries} draws (n={n}, p={edge_prob})")
