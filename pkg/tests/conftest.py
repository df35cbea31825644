from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from evocover import Chromosome, Graph, gnp_random_graph, load_edge_list, ring_of_cliques

DATA_DIR = Path(__file__).parent / "data"

TWO_TRIANGLE_TEXT = "1 2\n1 3\n2 3\n4 5\n4 6\n5 6\n3 4\n"


def make_chromosome(g: Graph, adhesion, set_bits=()) -> Chromosome:
    """Build a chromosome from an adhesion list and (node, neighbor) bit pairs."""
    bits = np.zeros(2 * g.num_edges, dtype=np.uint8)
    for i, j in set_bits:
        row = g.adjacency[i]
        pos = int(np.searchsorted(row, j))
        assert pos < len(row) and row[pos] == j, f"{j} is not a neighbor of {i}"
        bits[g.offsets[i] + pos] = 1
    return Chromosome(np.array(adhesion, dtype=np.int64), bits)


def node_of(g: Graph, label) -> int:
    return g.labels.index(str(label))


@pytest.fixture
def two_triangle() -> Graph:
    """Two triangles joined by one bridge edge; L = 7, best split Q = 5/14."""
    return load_edge_list(TWO_TRIANGLE_TEXT)


@pytest.fixture
def ring34():
    """Three 4-cliques in a chain; planted overlap nodes are labels 4 and 8."""
    return ring_of_cliques(3, 4)


@pytest.fixture(scope="session")
def karate() -> Graph:
    with open(DATA_DIR / "karate.txt", "r", encoding="utf-8") as fh:
        return load_edge_list(fh)


def connected_gnp(n: int, p: float, seed: int) -> Graph:
    """First connected G(n, p) drawn from consecutive seeds (deterministic)."""
    for offset in range(1000):
        g = gnp_random_graph(n, p, np.random.default_rng(seed + offset))
        if g.num_edges >= 1 and g.is_connected():
            return g
    raise RuntimeError(f"no connected graph found for n={n}, p={p}, seed={seed}")
