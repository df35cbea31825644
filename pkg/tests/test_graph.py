import io

import numpy as np
import pytest

from evocover import (
    GraphParseError,
    gnp_random_graph,
    load_edge_list,
    ring_of_cliques,
    write_edge_list,
)


def neighbor_labels(g):
    return {
        g.labels[i]: {g.labels[j] for j in g.adjacency[i]} for i in range(g.n)
    }


class TestLoadEdgeList:
    def test_duplicate_edges_collapse(self):
        g = load_edge_list("1 2\n2 3\n1 2\n")
        assert g.n == 3
        assert g.num_edges == 2
        assert neighbor_labels(g) == {"1": {"2"}, "2": {"1", "3"}, "3": {"2"}}
        assert g.dropped_duplicates == 1

    def test_self_loop_dropped_and_counted(self):
        g = load_edge_list("a a\na b\n")
        assert g.n == 2
        assert g.num_edges == 1
        assert g.dropped_self_loops == 1
        assert g.dropped_lines == 1

    def test_canonical_ring_reconstruction_edge_count(self):
        # three 4-cliques plus two bridges: 3 * 6 + 2 edges
        planted = ring_of_cliques(3, 4)
        buf = io.StringIO()
        write_edge_list(planted.graph, buf)
        g = load_edge_list(buf.getvalue())
        assert g.n == 12
        assert g.num_edges == 20

    def test_comments_and_blank_lines_ignored(self):
        g = load_edge_list("# header\n\n1 2\n  \n# trailing\n2 3\n")
        assert g.n == 3
        assert g.num_edges == 2

    def test_wrong_token_count_names_line(self):
        with pytest.raises(GraphParseError, match="line 2"):
            load_edge_list("1 2\n1 2 3\n")
        with pytest.raises(GraphParseError, match="line 1"):
            load_edge_list("lonely\n")

    def test_empty_input_rejected(self):
        with pytest.raises(GraphParseError):
            load_edge_list("")
        with pytest.raises(GraphParseError):
            load_edge_list("x x\n")  # only a self-loop

    def test_first_appearance_ids(self):
        g = load_edge_list("c a\nb c\n")
        assert g.labels == ["c", "a", "b"]


class TestRingOfCliques:
    def test_planted_truth_matches_caption(self, ring34):
        g = ring34.graph
        truth = ring34.truth
        by_labels = [
            sorted(int(g.labels[i]) for i in c) for c in truth.communities
        ]
        assert by_labels == [[1, 2, 3, 4], [4, 5, 6, 7, 8], [8, 9, 10, 11, 12]]
        overlap = sorted(int(g.labels[i]) for i in truth.overlap_nodes())
        assert overlap == [4, 8]
        counts = truth.membership_counts()
        assert sorted(counts.tolist(), reverse=True)[:2] == [2, 2]
        assert (counts <= 2).all()

    def test_smallest_instance(self):
        planted = ring_of_cliques(2, 3)
        assert planted.graph.n == 6
        assert planted.graph.num_edges == 7

    def test_edge_count_formula(self):
        planted = ring_of_cliques(4, 5)
        assert planted.graph.n == 20
        assert planted.graph.num_edges == 4 * 10 + 3

    def test_truth_shape(self):
        for c, s in [(2, 3), (3, 4), (5, 3), (4, 6)]:
            planted = ring_of_cliques(c, s)
            counts = planted.truth.membership_counts()
            assert len(planted.truth.communities) == c
            assert int((counts == 2).sum()) == c - 1
            assert int((counts == 1).sum()) == planted.graph.n - (c - 1)
            assert planted.graph.num_edges == c * s * (s - 1) // 2 + (c - 1)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            ring_of_cliques(1, 4)
        with pytest.raises(ValueError):
            ring_of_cliques(3, 2)


class TestGraphInvariants:
    def test_degree_sum_is_twice_edges(self):
        for seed in range(10):
            g = gnp_random_graph(20, 0.2, np.random.default_rng(seed))
            assert int(g.degrees.sum()) == 2 * g.num_edges

    def test_adjacency_symmetric_and_sorted(self):
        g = gnp_random_graph(15, 0.3, np.random.default_rng(3))
        for i in range(g.n):
            row = g.adjacency[i]
            assert (np.diff(row) > 0).all() if len(row) > 1 else True
            for j in row:
                assert i in g.neighbor_sets[j]
                assert i != j

    def test_round_trip(self):
        # isolated nodes are not representable in an edge list, so the
        # round-trip property is stated for min-degree-1 graphs
        checked = 0
        for seed in range(20):
            g = gnp_random_graph(12, 0.3, np.random.default_rng(seed))
            if g.num_edges == 0 or int(g.degrees.min()) == 0:
                continue
            buf = io.StringIO()
            write_edge_list(g, buf)
            h = load_edge_list(buf.getvalue())
            assert neighbor_labels(h) == neighbor_labels(g)
            checked += 1
        assert checked >= 3

    def test_is_connected(self):
        g = load_edge_list("1 2\n3 4\n")
        assert not g.is_connected()
        h = load_edge_list("1 2\n2 3\n")
        assert h.is_connected()

    def test_gnp_seeded_determinism(self):
        a = gnp_random_graph(10, 0.4, np.random.default_rng(11))
        b = gnp_random_graph(10, 0.4, np.random.default_rng(11))
        assert neighbor_labels(a) == neighbor_labels(b)
