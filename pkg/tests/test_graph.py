import numpy as np
import pytest
from hypothesis import given, strategies as st

from deepgraph.graph import (EmptySnapshotError, Graph, TemporalEdge, degree_vector, from_edge_list,
                             inverse_permutation, k_hop_ego_net, permute, read_edge_list, write_edge_list)
from oracles import bfs_ball, random_graph

K3 = Graph.from_pairs(3, [(0, 1), (1, 2), (0, 2)])
P3 = Graph.from_pairs(3, [(0, 1), (1, 2)])
STAR3 = Graph.from_pairs(4, [(0, 1), (0, 2), (0, 3)])


def E(*rows):
    return [TemporalEdge(*r) for r in rows]


class TestFromEdgeList:
    def test_reverse_pair_merged(self):
        g = from_edge_list(E((0, 1, 1), (1, 0, 2)), 2)
        assert g.n == 2 and g.edges == ((0, 1),)

    def test_late_edge_filtered(self):
        g = from_edge_list(E((0, 1, 1), (1, 2, 3)), 2)
        assert g.n == 2 and g.edges == ((0, 1),)

    def test_self_loop_dropped(self):
        g = from_edge_list(E((0, 0, 1), (0, 1, 1)), 1)
        assert g.edges == ((0, 1),)

    def test_empty_snapshot(self):
        with pytest.raises(EmptySnapshotError):
            from_edge_list(E((0, 1, 5)), 1)
        with pytest.raises(EmptySnapshotError):
            from_edge_list(E((3, 3, 0)), 1)

    def test_dense_reindex_keeps_labels(self):
        g = from_edge_list(E((10, 40, 0), (40, 7, 1)), 1)
        assert g.node_labels == (7, 10, 40)
        assert g.edges == ((0, 2), (1, 2))

    @given(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12), st.integers(0, 5)), min_size=1, max_size=60),
           st.integers(0, 5))
    def test_no_duplicates_or_loops(self, rows, t):
        recs = E(*rows)
        if not any(ts <= t and u != v for u, v, ts in rows):
            with pytest.raises(EmptySnapshotError):
                from_edge_list(recs, t)
            return
        g = from_edge_list(recs, t)
        assert len(set(g.edges)) == len(g.edges)
        assert all(u < v for u, v in g.edges)
        expected = {(min(a, b), max(a, b)) for a, b, ts in rows if ts <= t and a != b}
        got = {(g.node_labels[u], g.node_labels[v]) for u, v in g.edges}
        assert got == expected


class TestGraph:
    def test_rejects_bad_edges(self):
        with pytest.raises(ValueError):
            Graph(2, ((1, 0),))
        with pytest.raises(ValueError):
            Graph(2, ((0, 2),))
        with pytest.raises(ValueError):
            Graph(3, ((0, 1), (0, 1)))

    def test_degree_examples(self):
        assert degree_vector(K3).tolist() == [2, 2, 2]
        assert degree_vector(P3).tolist() == [1, 2, 1]
        assert degree_vector(Graph(3, ())).tolist() == [0, 0, 0]

    @given(st.integers(0, 25), st.floats(0, 1), st.integers(0, 2 ** 32 - 1))
    def test_degree_sum(self, n, p, seed):
        g = random_graph(np.random.default_rng(seed), n, p)
        assert degree_vector(g).sum() == 2 * g.n_edges


class TestEgoNet:
    def test_path_examples(self):
        assert k_hop_ego_net(P3, 0, 1).edges == ((0, 1),)
        assert k_hop_ego_net(P3, 0, 1).n == 2
        assert k_hop_ego_net(P3, 0, 2) == P3.__class__(3, P3.edges, (0, 1, 2))

    def test_star_leaf(self):
        ego = k_hop_ego_net(STAR3, 2, 1)
        assert ego.n == 2 and ego.edges == ((0, 1),)
        assert set(ego.node_labels) == {0, 2}

    def test_isolated_center(self):
        g = Graph.from_pairs(3, [(0, 1)])
        assert k_hop_ego_net(g, 2, 1).n == 1

    def test_whole_component(self):
        g = Graph.from_pairs(6, [(0, 1), (1, 2), (2, 3), (4, 5)])
        assert k_hop_ego_net(g, 0, None).n == 4

    @given(st.integers(1, 50), st.floats(0, 0.2), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
    def test_matches_frontier_oracle(self, n, p, k, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n, p)
        c = int(rng.integers(n))
        ego = k_hop_ego_net(g, c, k)
        ball = bfs_ball(g, c, k)
        assert set(ego.node_labels) == ball
        expected = {(u, v) for u, v in g.edges if u in ball and v in ball}
        assert {tuple(sorted((ego.node_labels[a], ego.node_labels[b]))) for a, b in ego.edges} == expected


class TestPermute:
    def test_identity(self):
        assert permute(P3, [0, 1, 2]).edges == P3.edges

    def test_k3(self):
        for perm in ([1, 2, 0], [2, 0, 1], [1, 0, 2]):
            assert permute(K3, perm).edges == K3.edges

    def test_path_reversal(self):
        assert permute(P3, [2, 1, 0]).edges == ((0, 1), (1, 2))

    def test_non_bijection(self):
        with pytest.raises(ValueError):
            permute(P3, [0, 0, 1])

    @given(st.integers(1, 30), st.floats(0, 0.5), st.integers(0, 2 ** 32 - 1))
    def test_round_trip_and_invariants(self, n, p, seed):
        rng = np.random.default_rng(seed)
        g = random_graph(rng, n, p)
        perm = rng.permutation(n).tolist()
        h = permute(g, perm)
        assert permute(h, inverse_permutation(perm)).edges == g.edges
        assert h.n_edges == g.n_edges
        assert sorted(degree_vector(h)) == sorted(degree_vector(g))


def test_edge_file_round_trip(tmp_path):
    recs = E((5, 3, 0.0), (3, 9, 2.5), (9, 5, 7.0))
    path = tmp_path / "edges.tsv"
    write_edge_list(path, recs, header="demo")
    text = path.read_text()
    assert text.startswith("# demo\n") and "5\t3\t0\n" in text
    assert read_edge_list(path) == recs


def test_edge_file_spaces_and_errors(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("# c\n1 2 3\n\n4   5\t6.5\n")
    assert read_edge_list(path) == E((1, 2, 3.0), (4, 5, 6.5))
    path.write_text("1 2\n")
    with pytest.raises(ValueError):
        read_edge_list(path)
    path.write_text("-1 2 0\n")
    with pytest.raises(ValueError):
        read_edge_list(path)
