"""Property-based checks of the invariants the theory rests on."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from satcon.analysis import _integral_term, lyapunov_fixed, predict_fixed_undirected
from satcon.dynamics import SaturationSpec, SimConfig, saturate, simulate, single_rhs
from satcon.graph import Graph, GraphSchedule, Segment, WeightFn, integral_graph, laplacian, weights_at

reals = st.floats(-1e3, 1e3, allow_nan=False)
levels = st.floats(0.01, 100.0, allow_nan=False)


@st.composite
def connected_graphs(draw, n_min=2, n_max=8):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for j in range(1, n):  # random spanning tree, then extra edges
        i = int(rng.integers(j))
        w[i, j] = w[j, i] = rng.uniform(0.5, 2.0)
    extra = np.triu(rng.random((n, n)) < 0.3, 1) & (w == 0)
    w[extra] = rng.uniform(0.5, 2.0, extra.sum())
    w = np.triu(w, 1)
    return Graph(w + w.T)


@given(reals, levels)
def test_saturate_odd_and_bounded(x, s):
    assert saturate(-x, s) == -saturate(x, s)
    assert abs(saturate(x, s)) <= min(abs(x), s)


@given(reals, reals, levels)
def test_saturate_monotone(x, y, s):
    assert (x - y) * (saturate(x, s) - saturate(y, s)) >= 0


@given(st.floats(-50, 50), st.floats(-50, 50), levels)
def test_integral_term_nonnegative(a, b, s):
    a = float(np.clip(a, -s, s))
    val = float(_integral_term(np.array([a]), np.array([b]), np.array([s]))[0])
    assert val >= 0
    if a == b:
        assert val == 0


@given(connected_graphs())
def test_laplacian_symmetric_psd(g):
    lap = laplacian(g)
    assert np.array_equal(lap, lap.T)
    assert np.linalg.eigvalsh(lap)[0] >= -1e-10
    np.testing.assert_allclose(lap @ np.ones(g.n), 0, atol=1e-12)


@given(connected_graphs(), st.integers(0, 2**32 - 1))
def test_rhs_sums_to_zero(g, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-10, 10, g.n)
    dx = single_rhs(x, g.weights, SaturationSpec(rng.uniform(0.5, 3.0, g.n)))
    assert abs(math.fsum(dx)) <= 1e-12 * max(1.0, np.abs(dx).sum())


# stay off the period boundary itself: there the sinusoids jump back to their
# phase at zero, and rounding of t + 3 * period decides which side is evaluated
@given(st.floats(0, 5), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.5, 20), st.floats(0.01, 0.99))
def test_schedule_periodic(c0, cs, cc, period, frac):
    c0 = c0 + math.hypot(cs, cc)
    fn = WeightFn(c0, cs, cc)
    sched = GraphSchedule(2, (Segment(0.0, period, {(0, 1): fn, (1, 0): fn}),), period=period)
    t = frac * period
    np.testing.assert_allclose(weights_at(sched, t), weights_at(sched, t + 3 * period), rtol=1e-9, atol=1e-9)


@given(st.floats(1e-9, 1e3), st.floats(1e-9, 1e3))
def test_integral_graph_monotone_in_eps(e1, e2):
    one, weak = WeightFn(1.0), WeightFn(0.01)
    edges = {(0, 1): one, (1, 0): one, (1, 2): weak, (2, 1): weak}
    sched = GraphSchedule(3, (Segment(0, 2, edges), Segment(2, 5)), period=5.0)
    lo, hi = sorted((e1, e2))
    assert np.count_nonzero(integral_graph(sched, hi).weights) <= np.count_nonzero(integral_graph(sched, lo).weights)


sim_settings = settings(max_examples=15, deadline=None)


@sim_settings
@given(connected_graphs(n_max=6), st.integers(0, 2**32 - 1), st.booleans())
def test_average_invariant(g, seed, hetero):
    rng = np.random.default_rng(seed)
    sat = SaturationSpec(rng.uniform(0.5, 3.0, g.n) if hetero else np.full(g.n, 1.5))
    x0 = rng.uniform(-5, 5, g.n)
    traj = simulate("single", x0, g, sat, SimConfig(dt=0.01, t_end=10.0))
    sums = np.array([math.fsum(row) for row in traj.states])
    assert np.abs(sums - math.fsum(x0)).max() <= 1e-10 * max(1.0, np.abs(x0).sum())


@sim_settings
@given(connected_graphs(n_max=6), st.integers(0, 2**32 - 1))
def test_homogeneous_max_min_monotone(g, seed):
    rng = np.random.default_rng(seed)
    sat = SaturationSpec.uniform(rng.uniform(0.5, 3.0), g.n)
    traj = simulate("single", rng.uniform(-5, 5, g.n), g, sat, SimConfig(dt=0.01, t_end=10.0, record_stride=1))
    slack = 1e-12
    assert np.all(np.diff(traj.states.max(axis=1)) <= slack)
    assert np.all(np.diff(traj.states.min(axis=1)) >= -slack)


@sim_settings
@given(connected_graphs(n_max=6), st.integers(0, 2**32 - 1))
def test_lyapunov_nonincreasing_when_achievable(g, seed):
    rng = np.random.default_rng(seed)
    sat = SaturationSpec(rng.uniform(0.5, 3.0, g.n))
    x0 = rng.uniform(-5, 5, g.n)
    x0 += rng.uniform(-sat.min_level, sat.min_level) - x0.mean()
    report = predict_fixed_undirected(x0, sat, g)
    traj = simulate("single", x0, g, sat, SimConfig(dt=0.01, t_end=10.0, record_stride=1))
    values = np.array([lyapunov_fixed(x, report.decision_value, sat) for x in traj.states])
    assert np.all(np.diff(values) <= 1e-9 * max(1.0, values[0]))
