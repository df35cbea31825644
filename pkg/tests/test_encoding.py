import io

import numpy as np
import pytest

from evocover import (
    Chromosome,
    InvalidChromosomeError,
    InvalidCoverError,
    decode_cover,
    decode_primary,
    extend_cover,
    extract_primary,
    format_cover,
    gnp_random_graph,
    load_edge_list,
    parse_cover,
    random_chromosome,
    repair,
)


from conftest import make_chromosome, node_of


def clique_chain_chromosome(planted, set_bits=()):
    """Adhesion chain inside each clique of a ring_of_cliques graph.

    Cliques span contiguous id blocks in this generator, so chaining each
    node to its predecessor (block heads self-adhere) decodes to the cliques.
    """
    g = planted.graph
    size = g.n // len(planted.truth.communities)
    adhesion = [i if i % size == 0 else i - 1 for i in range(g.n)]
    return make_chromosome(g, adhesion, set_bits)


class TestDecodePrimary:
    def test_identity_gives_singletons(self, two_triangle):
        g = two_triangle
        chrom = make_chromosome(g, list(range(g.n)))
        pi = decode_primary(chrom, g)
        assert len(pi.communities) == g.n
        assert all(len(c) == 1 for c in pi.communities)

    def test_ring_cliques_decode_to_primary_partition(self, ring34):
        g = ring34.graph
        chrom = clique_chain_chromosome(ring34)
        pi = decode_primary(chrom, g)
        by_labels = [sorted(int(g.labels[i]) for i in c) for c in pi.communities]
        assert by_labels == [[1, 2, 3, 4], [5, 6, 7, 8], [9, 10, 11, 12]]

    def test_two_triangle_cycles(self, two_triangle):
        g = two_triangle
        # 1-based cycles (1->2->3->1, 4->5->6->4) from the label mapping
        adhesion = [node_of(g, t) for t in ("2", "3", "1", "5", "6", "4")]
        pi = decode_primary(make_chromosome(g, adhesion), g)
        by_labels = [sorted(g.labels[i] for i in c) for c in pi.communities]
        assert by_labels == [["1", "2", "3"], ["4", "5", "6"]]

    def test_non_neighbor_adhesion_rejected(self, two_triangle):
        g = two_triangle
        adhesion = list(range(g.n))
        adhesion[0] = node_of(g, "6")  # label 1 and 6 are not adjacent
        with pytest.raises(InvalidChromosomeError):
            decode_primary(make_chromosome(g, adhesion), g)

    def test_wrong_segment_lengths_rejected(self, two_triangle):
        g = two_triangle
        with pytest.raises(InvalidChromosomeError):
            decode_primary(
                Chromosome(np.zeros(3, dtype=np.int64), np.zeros(14, dtype=np.uint8)), g
            )
        with pytest.raises(InvalidChromosomeError):
            decode_primary(
                Chromosome(np.arange(6, dtype=np.int64), np.zeros(3, dtype=np.uint8)), g
            )

    def test_community_ids_sorted_by_min_member(self, ring34):
        g = ring34.graph
        pi = decode_primary(clique_chain_chromosome(ring34), g)
        mins = [min(c) for c in pi.communities]
        assert mins == sorted(mins)
        assert pi.assignment[0] == 0


class TestExtendCover:
    def test_zero_bits_reproduce_partition(self, ring34):
        g = ring34.graph
        chrom = clique_chain_chromosome(ring34)
        pi = decode_primary(chrom, g)
        cover = extend_cover(chrom, pi, g, k_max=2)
        assert (cover.membership_counts() == 1).all()
        assert cover.as_sets() == frozenset(frozenset(c) for c in pi.communities)

    def test_bridge_bits_recover_planted_cover(self, ring34):
        g = ring34.graph
        # overlap nodes 4 and 8 adhere across their bridge edges
        four, eight = node_of(g, 4), node_of(g, 8)
        bridge_of = {}
        for i in (four, eight):
            foreign = [j for j in g.adjacency[i] if j // 4 != i // 4]
            assert len(foreign) == 1
            bridge_of[i] = int(foreign[0])
        chrom = clique_chain_chromosome(
            ring34, set_bits=[(four, bridge_of[four]), (eight, bridge_of[eight])]
        )
        cover = decode_cover(chrom, g, k_max=2)
        assert cover.as_sets() == ring34.truth.as_sets()
        counts = cover.membership_counts()
        assert counts[four] == 2 and counts[eight] == 2

    def test_double_bits_into_same_community_count_once(self):
        # node c sits in triangle {a,b,c} and has two neighbors (d, e) inside
        # the same foreign community; both bits grant a single membership
        g = load_edge_list("a b\na c\nb c\nc d\nc e\nd e\n")
        a, b, c = node_of(g, "a"), node_of(g, "b"), node_of(g, "c")
        d, e = node_of(g, "d"), node_of(g, "e")
        adhesion = [b, a, a, e, d]
        chrom = make_chromosome(g, adhesion, set_bits=[(c, d), (c, e)])
        cover = decode_cover(chrom, g, k_max=3)
        assert cover.membership_counts()[c] == 2
        assert frozenset({c, d, e}) in cover.as_sets()

    def test_bridge_bit_adds_single_membership(self, two_triangle):
        g = two_triangle
        adhesion = [node_of(g, t) for t in ("2", "3", "1", "5", "6", "4")]
        three = node_of(g, "3")
        four = node_of(g, "4")
        chrom = make_chromosome(g, adhesion, set_bits=[(three, four)])
        cover = decode_cover(chrom, g, k_max=2)
        assert cover.membership_counts()[three] == 2
        sets = {frozenset(c) for c in cover.communities}
        assert frozenset({three, four, node_of(g, "5"), node_of(g, "6")}) in sets

    def test_membership_cap_respected(self):
        # center c self-adheres (own singleton community) and points at two
        # distinct foreign communities; K = 2 admits only the first
        g = load_edge_list("c a\nc b\nc d\na b\n")
        c = node_of(g, "c")
        a, b, d = node_of(g, "a"), node_of(g, "b"), node_of(g, "d")
        adhesion = [c, b, a, d]
        chrom = make_chromosome(g, adhesion, set_bits=[(c, a), (c, d)])
        cover = decode_cover(chrom, g, k_max=2)
        assert cover.membership_counts()[c] == 2
        assert frozenset({a, b, c}) in cover.as_sets()
        assert frozenset({d}) in cover.as_sets()  # the over-cap join was ignored


class TestRepair:
    def test_inert_bit_cleared(self, two_triangle):
        g = two_triangle
        adhesion = [node_of(g, t) for t in ("2", "3", "1", "5", "6", "4")]
        two, three = node_of(g, "2"), node_of(g, "3")
        chrom = make_chromosome(g, adhesion, set_bits=[(two, three)])
        fixed = repair(chrom, g, k_max=2)
        assert fixed.overlap_bits.sum() == 0

    def test_all_zero_is_fixed_point(self, ring34):
        g = ring34.graph
        chrom = clique_chain_chromosome(ring34)
        assert repair(chrom, g, 2) == chrom

    def test_cap_keeps_lowest_neighbors(self):
        # center x with three foreign singleton communities a < b < d
        g = load_edge_list("x a\nx b\nx d\n")
        x = node_of(g, "x")
        a, b, d = node_of(g, "a"), node_of(g, "b"), node_of(g, "d")
        adhesion = [x, a, b, d]  # everyone self-adheres -> four singletons
        chrom = make_chromosome(g, adhesion, set_bits=[(x, a), (x, b), (x, d)])
        fixed = repair(chrom, g, k_max=2)
        kept = [int(g.adjacency[x][p]) for p in range(3) if fixed.bits_for(g, x)[p]]
        assert kept == [min(a, b, d)]
        cover = decode_cover(chrom, g, k_max=2)
        assert cover.membership_counts()[x] == 2

    def test_repair_is_idempotent_and_semantics_preserving(self, ring34):
        g = ring34.graph
        rng = np.random.default_rng(5)
        for _ in range(50):
            raw = Chromosome(
                np.array(
                    [rng.choice(g.adjacency[i]) for i in range(g.n)], dtype=np.int64
                ),
                (rng.random(2 * g.num_edges) < 0.4).astype(np.uint8),
            )
            fixed = repair(raw, g, 2)
            assert repair(fixed, g, 2) == fixed
            pi = decode_primary(raw, g)
            assert (
                extend_cover(raw, pi, g, 2).as_sets()
                == extend_cover(fixed, pi, g, 2).as_sets()
            )


class TestRandomChromosome:
    def test_zero_overlap_probability(self, ring34):
        g = ring34.graph
        rng = np.random.default_rng(0)
        chrom = random_chromosome(g, 0.0, rng, 2)
        cover = decode_cover(chrom, g, 2)
        assert (cover.membership_counts() == 1).all()

    def test_isolated_node_self_adheres(self):
        g = load_edge_list("1 2\n")
        # append an isolated node by constructing directly
        from evocover.graph import Graph

        g2 = Graph([{1}, {0}, set()], labels=["1", "2", "3"])
        chrom = random_chromosome(g2, 0.5, np.random.default_rng(1), 2)
        assert chrom.adhesion[2] == 2

    def test_seeded_determinism(self, karate):
        a = random_chromosome(karate, 0.2, np.random.default_rng(42), 2)
        b = random_chromosome(karate, 0.2, np.random.default_rng(42), 2)
        assert a == b

    def test_every_cover_valid(self, karate):
        rng = np.random.default_rng(9)
        for _ in range(25):
            cover = decode_cover(random_chromosome(karate, 0.3, rng, 2), karate, 2)
            cover.validate()
            assert (cover.membership_counts() <= 2).all()


class TestProperties:
    def test_extraction_duality(self, karate):
        rng = np.random.default_rng(23)
        for _ in range(25):
            chrom = random_chromosome(karate, 0.3, rng, 2)
            pi = decode_primary(chrom, karate)
            cover = extend_cover(chrom, pi, karate, 2)
            extracted = extract_primary(cover)
            assert [sorted(c) for c in extracted.communities] == [
                sorted(c) for c in pi.communities
            ]

    def test_permutation_equivariance(self, two_triangle):
        g = two_triangle
        rng = np.random.default_rng(3)
        chrom = random_chromosome(g, 0.0, rng, 2)
        pi = decode_primary(chrom, g)

        perm = rng.permutation(g.n)
        inv = np.argsort(perm)
        # relabel the graph and the chromosome with node i -> perm[i]
        sets = [set() for _ in range(g.n)]
        for i, j in g.edges():
            sets[perm[i]].add(int(perm[j]))
            sets[perm[j]].add(int(perm[i]))
        from evocover.graph import Graph

        h = Graph(sets, labels=[g.labels[int(inv[i])] for i in range(g.n)])
        relabeled = Chromosome(
            np.array(
                [perm[chrom.adhesion[int(inv[i])]] for i in range(g.n)], dtype=np.int64
            ),
            np.zeros(2 * g.num_edges, dtype=np.uint8),
        )
        pi_h = decode_primary(relabeled, h)
        expected = {frozenset(int(perm[i]) for i in c) for c in pi.communities}
        assert {frozenset(c) for c in pi_h.communities} == expected


class TestCoverSerialization:
    def test_round_trip(self, ring34):
        g = ring34.graph
        text = format_cover(ring34.truth, g)
        loaded = parse_cover(text, g)
        assert loaded.as_sets() == ring34.truth.as_sets()
        assert loaded.k_max == 2

    def test_format_deterministic_lines(self, ring34):
        g = ring34.graph
        lines = format_cover(ring34.truth, g).splitlines()
        assert lines[0] == "1 2 3 4"
        assert lines[1] == "4 5 6 7 8"
        assert lines[2] == "8 9 10 11 12"

    def test_parse_rejects_unknown_label(self, two_triangle):
        with pytest.raises(InvalidCoverError, match="unknown"):
            parse_cover("1 2 3 99\n4 5 6\n", two_triangle)

    def test_parse_rejects_uncovered_node(self, two_triangle):
        with pytest.raises(InvalidCoverError, match="not covered"):
            parse_cover("1 2 3\n4 5\n", two_triangle)

    def test_parse_rejects_empty(self, two_triangle):
        with pytest.raises(InvalidCoverError):
            parse_cover("\n\n", two_triangle)
