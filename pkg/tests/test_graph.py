"""Graph construction, degrees, core decomposition, and PageRank."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clickgraph import graph as G
from clickgraph.errors import ConvergenceError, MalformedInputError

from helpers import dense_pagerank_oracle, kcore_oracle, random_graph


class TestBuildGraph:
    def test_duplicate_collapse(self):
        g = G.build_graph([(0, 1), (0, 1), (1, 0)])
        assert g.n_nodes == 2
        assert g.n_edges == 2

    def test_empty(self):
        g = G.build_graph([], n_nodes=0)
        assert g.n_nodes == 0
        assert g.n_edges == 0

    def test_self_loops_retained_and_counted(self):
        g = G.build_graph([(0, 0), (0, 1)])
        assert g.n_edges == 2
        assert g.self_loops == 1

    def test_id_out_of_declared_range(self):
        with pytest.raises(MalformedInputError):
            G.build_graph([(0, 5)], n_nodes=3)

    def test_negative_id(self):
        with pytest.raises(MalformedInputError):
            G.build_graph([(-1, 0)])

    def test_random_edges_match_set_oracle(self):
        rng = np.random.default_rng(11)
        edges = [tuple(e) for e in rng.integers(0, 40, size=(1000, 2))]
        g = G.build_graph(edges)
        unique = set(edges)
        assert g.n_edges == len(unique)
        assert g.n_nodes == max(max(s, t) for s, t in edges) + 1
        for s, t in unique:
            assert g.has_edge(s, t)

    def test_adjacency_sorted_both_directions(self):
        g = random_graph(30, 0.2, seed=3)
        for i in range(g.n_nodes):
            out = g.out_neighbors(i)
            assert np.all(np.diff(out) > 0)
            inn = g.in_neighbors(i)
            assert np.all(np.diff(inn) > 0)


class TestDegrees:
    def test_path(self):
        g = G.build_graph([(0, 1), (1, 2)])
        ind, outd, deg = G.degrees(g)
        assert list(outd.values) == [1, 1, 0]
        assert list(ind.values) == [0, 1, 1]
        assert list(deg.values) == [1, 2, 1]

    def test_empty(self):
        g = G.build_graph([], n_nodes=0)
        ind, outd, deg = G.degrees(g)
        assert len(ind.values) == len(outd.values) == len(deg.values) == 0

    def test_random_matches_dense_adjacency_scan(self):
        g = random_graph(60, 0.1, seed=5)
        adj = np.zeros((60, 60), dtype=int)
        for i in range(60):
            adj[i, g.out_neighbors(i)] = 1
        ind, outd, _ = G.degrees(g)
        np.testing.assert_array_equal(outd.values, adj.sum(axis=1))
        np.testing.assert_array_equal(ind.values, adj.sum(axis=0))

    def test_degree_sums_equal_edge_count(self):
        g = random_graph(80, 0.05, seed=9)
        ind, outd, _ = G.degrees(g)
        assert ind.values.sum() == outd.values.sum() == g.n_edges


class TestKcore:
    def test_triangle(self):
        g = G.build_graph([(0, 1), (1, 2), (2, 0)])
        assert list(G.kcore(g).values) == [2, 2, 2]

    def test_star(self):
        g = G.build_graph([(0, 1), (0, 2), (0, 3), (0, 4)])
        assert list(G.kcore(g).values) == [1, 1, 1, 1, 1]

    def test_self_loop_cannot_sustain_a_core(self):
        g = G.build_graph([(0, 0), (0, 1)])
        assert list(G.kcore(g).values) == [1, 1]

    def test_random_graph_matches_peeling_oracle(self):
        g = random_graph(200, 0.05, seed=13)
        np.testing.assert_array_equal(G.kcore(g).values, kcore_oracle(g))

    def test_nonnegative_integers(self):
        g = random_graph(50, 0.1, seed=17)
        cores = G.kcore(g).values
        assert cores.dtype.kind == "i"
        assert cores.min() >= 0

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_adding_an_edge_never_decreases_core_numbers(self, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(25, 0.1, seed=seed)
        before = G.kcore(g).values
        s, t = rng.integers(0, 25, size=2)
        pairs = np.stack([g.edge_sources, g.out_indices], axis=1)
        augmented = np.vstack([pairs, [[s, t]]])
        g2 = G.build_graph(augmented, n_nodes=25)
        after = G.kcore(g2).values
        assert np.all(after >= before)


class TestPagerank:
    def test_two_cycle_symmetry(self):
        g = G.build_graph([(0, 1), (1, 0)])
        np.testing.assert_allclose(G.pagerank(g, alpha=0.85).values, [0.5, 0.5], atol=1e-12)

    def test_single_node_no_edges(self):
        g = G.build_graph([], n_nodes=1)
        np.testing.assert_allclose(G.pagerank(g).values, [1.0])

    def test_chain_matches_dense_solve(self):
        g = G.build_graph([(0, 1), (1, 2)])
        pr = G.pagerank(g, alpha=0.85).values
        np.testing.assert_allclose(pr, dense_pagerank_oracle(g, 0.85), atol=1e-9)

    def test_random_graphs_match_dense_solve(self):
        for seed in range(5):
            g = random_graph(40, 0.1, seed=seed)
            pr = G.pagerank(g, alpha=0.85).values
            np.testing.assert_allclose(pr, dense_pagerank_oracle(g, 0.85), atol=1e-8)

    def test_probability_vector_on_every_input(self):
        for seed in range(8):
            g = random_graph(70, 0.03, seed=100 + seed)
            assert abs(G.pagerank(g).values.sum() - 1.0) <= 1e-9

    def test_alpha_and_tol_validation(self):
        g = G.build_graph([(0, 1)])
        with pytest.raises(ValueError):
            G.pagerank(g, alpha=1.0)
        with pytest.raises(ValueError):
            G.pagerank(g, tol=0.0)

    def test_nonconvergence_carries_last_iterate(self):
        g = random_graph(50, 0.1, seed=21)
        with pytest.raises(ConvergenceError) as exc:
            G.pagerank(g, alpha=0.95, tol=1e-16, max_iter=3)
        assert exc.value.last is not None
        assert len(exc.value.last) == 50
        assert exc.value.iterations == 3


class TestSnapshot:
    def test_round_trip(self, tmp_path):
        g = random_graph(25, 0.15, seed=29, labels=True)
        path = tmp_path / "graph.tsv"
        G.save_graph(g, path, header_lines=["tool test"])
        g2 = G.load_graph(path)
        assert G.same_structure(g, g2)
        assert g2.labels == g.labels

    def test_magic_header_enforced(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("not a snapshot\n")
        with pytest.raises(MalformedInputError):
            G.load_graph(path)
