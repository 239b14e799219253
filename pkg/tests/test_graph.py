import math

import numpy as np
import pytest

from satcon.graph import (
    Graph,
    GraphError,
    GraphSchedule,
    Segment,
    WeightFn,
    integral_components,
    integral_graph,
    is_connected,
    is_integrally_connected,
    is_strongly_connected,
    laplacian,
    laplacian_spectrum,
    left_eigenvector,
    random_connected_graph,
    weights_at,
)

from conftest import FIG10_P


def path(n, directed=False):
    return Graph.from_edges(n, [(i, i + 1, 1.0) for i in range(n - 1)], directed=directed)


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n, 1.0) for i in range(n)], directed=True)


class TestGraphType:
    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(GraphError, match="diagonal"):
            Graph(np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_rejects_negative_weight(self):
        with pytest.raises(GraphError, match="nonnegative"):
            Graph(np.array([[0.0, -1.0], [-1.0, 0.0]]))

    def test_rejects_asymmetric_undirected(self):
        with pytest.raises(GraphError, match="symmetric"):
            Graph(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_weights_are_copied_and_frozen(self):
        w = np.array([[0.0, 1.0], [1.0, 0.0]])
        g = Graph(w)
        w[0, 1] = 5.0
        assert g.weights[0, 1] == 1.0
        with pytest.raises(ValueError):
            g.weights[0, 1] = 2.0


class TestLaplacian:
    def test_two_nodes(self):
        np.testing.assert_array_equal(laplacian(path(2)), [[1, -1], [-1, 1]])

    def test_fig10_graph_roundtrip(self, digraph6, fig10_laplacian):
        np.testing.assert_array_equal(laplacian(digraph6), fig10_laplacian)
        assert laplacian(digraph6)[0].tolist() == [4, -1, -3, 0, 0, 0]

    def test_empty_graph(self):
        np.testing.assert_array_equal(laplacian(Graph(np.zeros((3, 3)))), np.zeros((3, 3)))

    def test_rows_sum_to_zero(self):
        # integer weights: every partial sum is exact, so the zero is exact
        g = Graph(np.random.default_rng(4).integers(0, 5, (9, 9)) * (1 - np.eye(9)), directed=True)
        assert np.all(laplacian(g) @ np.ones(9) == 0)
        # real weights: the diagonal is minus the off-diagonal sum, so only rounding remains
        g = random_connected_graph(20, 0.3, (0.1, 3.7), seed=4)
        lap = laplacian(g)
        assert np.all(np.abs(lap.sum(axis=1)) <= 8 * np.finfo(float).eps * np.abs(lap).sum(axis=1))


class TestConnectivity:
    def test_path_connected(self):
        assert is_connected(path(4))

    def test_two_disjoint_edges(self):
        assert not is_connected(Graph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]))

    def test_single_node(self):
        assert is_connected(Graph(np.zeros((1, 1))))

    def test_is_connected_rejects_directed(self):
        with pytest.raises(GraphError):
            is_connected(cycle(3))

    def test_fig10_strongly_connected(self, digraph6):
        assert is_strongly_connected(digraph6)

    def test_directed_path_not_strong(self):
        assert not is_strongly_connected(path(3, directed=True))

    def test_cycle_strong(self):
        assert is_strongly_connected(cycle(5))

    def test_strong_rejects_undirected(self):
        with pytest.raises(GraphError):
            is_strongly_connected(path(3))

    @pytest.mark.parametrize("seed", range(10))
    def test_connectivity_matches_fiedler_value(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 12))
        mask = np.triu(rng.random((n, n)) < 0.25, 1)
        g = Graph((mask | mask.T).astype(float))
        assert is_connected(g) == (laplacian_spectrum(g)[1] > 1e-8)


class TestLeftEigenvector:
    def test_fig10_values(self, digraph6):
        np.testing.assert_allclose(left_eigenvector(digraph6), FIG10_P, atol=1e-3)

    def test_balanced_graph_uniform(self):
        g = random_connected_graph(7, 0.4, (0.5, 2.0), seed=1).as_directed()
        np.testing.assert_allclose(left_eigenvector(g), np.full(7, 1 / 7), atol=1e-12)

    def test_random_digraph_residual(self):
        g = random_connected_graph(8, 0.3, (0.2, 3.0), seed=7, directed=True)
        p = left_eigenvector(g)
        lap = laplacian(g)
        assert np.linalg.norm(p @ lap) <= 1e-10 * max(np.linalg.norm(lap), 1.0)
        assert np.all(p > 0) and math.isclose(p.sum(), 1.0, rel_tol=0, abs_tol=1e-14)

    def test_not_strongly_connected(self):
        with pytest.raises(GraphError):
            left_eigenvector(path(3, directed=True))

    def test_rejects_undirected(self):
        with pytest.raises(GraphError):
            left_eigenvector(path(3))


class TestSpectrum:
    def test_k3(self):
        g = Graph(np.ones((3, 3)) - np.eye(3))
        np.testing.assert_allclose(laplacian_spectrum(g), [0, 3, 3], atol=1e-12)

    def test_two_nodes(self):
        np.testing.assert_allclose(laplacian_spectrum(path(2)), [0, 2], atol=1e-12)

    def test_random_connected(self):
        lam = laplacian_spectrum(random_connected_graph(10, 0.3, seed=3))
        assert abs(lam[0]) <= 1e-10 and lam[1] > 0

    def test_rejects_directed(self):
        with pytest.raises(GraphError):
            laplacian_spectrum(cycle(3))


class TestWeightFn:
    def test_rejects_possibly_negative(self):
        with pytest.raises(GraphError, match="negative"):
            WeightFn(1.0, 1.0, 1.0)

    def test_zero_allowed(self):
        assert WeightFn(0.0).is_zero()

    def test_touching_zero_allowed_but_unbounded(self):
        fn = WeightFn(1.0, 1.0)
        assert fn.lower_bound() == 0.0

    def test_evaluation(self):
        assert WeightFn(3.0, 1.0)(math.pi / 2) == pytest.approx(4.0)


class TestSchedule:
    def test_fig7_at_zero(self, fig7):
        w = weights_at(fig7, 0.0)
        expected = np.zeros((4, 4))
        expected[0, 1] = expected[1, 0] = 3.0
        np.testing.assert_array_equal(w, expected)

    def test_fig7_at_four(self, fig7):
        w = weights_at(fig7, 4.0)
        assert np.count_nonzero(w) == 2
        assert w[0, 2] == w[2, 0] == pytest.approx(2 - math.cos(4.0))

    def test_boundary_is_right_continuous(self, fig7):
        w = weights_at(fig7, 3.0)
        assert w[0, 1] == 0 and w[0, 2] > 0

    def test_periodic(self, fig7):
        for t in np.linspace(0, 9.99, 37):
            np.testing.assert_allclose(weights_at(fig7, t), weights_at(fig7, t + 10.0), atol=1e-12)

    def test_gap_rejected(self):
        with pytest.raises(GraphError, match="gap"):
            GraphSchedule(2, (Segment(0, 1), Segment(2, 3)))

    def test_overlap_rejected(self):
        with pytest.raises(GraphError, match="overlaps"):
            GraphSchedule(2, (Segment(0, 2), Segment(1, 3)))

    def test_unmatched_symmetric_edge(self):
        with pytest.raises(GraphError, match="matching"):
            GraphSchedule(2, (Segment(0, 1, {(0, 1): WeightFn(1.0)}),))

    def test_period_mismatch(self):
        with pytest.raises(GraphError, match="period"):
            GraphSchedule(2, (Segment(0, 1),), period=2.0)

    def test_beyond_horizon(self):
        s = GraphSchedule(2, (Segment(0, 1),))
        with pytest.raises(GraphError, match="horizon"):
            weights_at(s, 1.5)

    def test_negative_time(self, fig7):
        with pytest.raises(GraphError):
            weights_at(fig7, -0.1)


class TestIntegralGraph:
    def test_fig7_edges(self, fig7):
        g = integral_graph(fig7)
        edges = {(i, j) for i, j in zip(*np.nonzero(np.triu(g.weights)))}
        assert edges == {(0, 1), (0, 2), (1, 3)}
        assert is_integrally_connected(fig7)

    def test_fig7_disconnected_at_every_instant(self, fig7):
        for t in np.linspace(0, 10, 41):
            assert not is_connected(Graph(weights_at(fig7, t)))

    def test_zero_weight_edge_absent(self):
        z = WeightFn(0.0)
        s = GraphSchedule(2, (Segment(0, 1, {(0, 1): z, (1, 0): z}),), period=1.0)
        assert integral_graph(s).weights[0, 1] == 0

    def test_non_periodic_rejected(self):
        s = GraphSchedule(2, (Segment(0, 1),))
        with pytest.raises(GraphError, match="limit notion"):
            integral_graph(s)

    def test_two_pairs_not_connected(self):
        one = WeightFn(1.0)
        edges = {(0, 1): one, (1, 0): one, (2, 3): one, (3, 2): one}
        s = GraphSchedule(4, (Segment(0, 1, edges),), period=1.0)
        assert not is_integrally_connected(s)
        assert integral_components(s) == [[0, 1], [2, 3]]

    def test_static_graph_schedule(self):
        assert is_integrally_connected(GraphSchedule.from_graph(path(5), period=2.0))

    def test_monotone_in_eps(self, fig7):
        counts = [np.count_nonzero(integral_graph(fig7, eps).weights) for eps in (1e-9, 1.0, 5.0, 20.0, 1e3)]
        assert counts == sorted(counts, reverse=True)


def test_random_graph_reproducible():
    a = random_connected_graph(12, 0.2, (0.5, 2.0), seed=9)
    b = random_connected_graph(12, 0.2, (0.5, 2.0), seed=9)
    np.testing.assert_array_equal(a.weights, b.weights)
    assert is_connected(a)
