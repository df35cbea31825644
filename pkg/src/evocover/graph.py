"""Graph data model, edge-list I/O, and synthetic benchmarks with planted covers.

Graphs are undirected and simple: external node labels are remapped to dense
internal ids 0..n-1 in first-appearance order, self-loops are dropped and
duplicate edges collapsed (both counted, not rejected).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Sequence, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .encoding import Cover

__all__ = [
    "Graph",
    "GraphParseError",
    "PlantedCover",
    "load_edge_list",
    "write_edge_list",
    "ring_of_cliques",
    "gnp_random_graph",
]


class GraphParseError(ValueError):
    """Raised when an edge-list stream cannot be parsed into a usable graph."""


class Graph:
    """Undirected simple graph with dense internal node ids.

    Attributes
    ----------
    n : int
        Number of nodes; internal ids are 0..n-1.
    adjacency : list of int arrays
        ``adjacency[i]`` holds the neighbors of node i, sorted ascending.
    neighbor_sets : list of frozensets
        Same neighborhoods as sets, for O(1) membership tests.
    degrees : int array
        ``degrees[i] == len(adjacency[i])``.
    num_edges : int
        Total undirected edge count; ``degrees.sum() == 2 * num_edges``.
    labels : list of str
        Original external label of each internal id.
    offsets : int array, shape (n+1,)
        CSR pointers into ``flat_adjacency``; node i's neighbors (and its
        per-neighbor overlap bits in a chromosome) live in
        ``flat_adjacency[offsets[i]:offsets[i+1]]``.

    Instances are immutable after construction and safe to share across
    any number of concurrent readers.
    """

    def __init__(
        self,
        neighbor_sets: Sequence[Iterable[int]],
        labels: Sequence[str] | None = None,
        dropped_self_loops: int = 0,
        dropped_duplicates: int = 0,
    ):
        n = len(neighbor_sets)
        sets = [frozenset(s) for s in neighbor_sets]
        for i, s in enumerate(sets):
            if i in s:
                raise ValueError(f"node {i} has a self-loop")
            for j in s:
                if not 0 <= j < n:
                    raise ValueError(f"neighbor {j} of node {i} out of range")
                if i not in sets[j]:
                    raise ValueError(f"adjacency not symmetric at ({i}, {j})")
        self.n = n
        self.neighbor_sets = sets
        self.adjacency = [np.array(sorted(s), dtype=np.int64) for s in sets]
        self.degrees = np.array([len(s) for s in sets], dtype=np.int64)
        self.num_edges = int(self.degrees.sum()) // 2
        if labels is None:
            labels = [str(i) for i in range(n)]
        if len(labels) != n:
            raise ValueError("labels length does not match node count")
        self.labels = list(labels)
        self.dropped_self_loops = dropped_self_loops
        self.dropped_duplicates = dropped_duplicates
        self.offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=self.offsets[1:])
        self.flat_adjacency = (
            np.concatenate(self.adjacency) if self.num_edges else np.empty(0, dtype=np.int64)
        )
        # plain-int copies for scoring loops, where numpy element access is slow
        self._adj_lists = [row.tolist() for row in self.adjacency]

    @property
    def dropped_lines(self) -> int:
        """Input lines that added nothing: self-loops plus duplicate edges."""
        return self.dropped_self_loops + self.dropped_duplicates

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None
    ) -> "Graph":
        """Build a graph from internal-id edge pairs (self-loops/dups collapsed)."""
        sets: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            sets[u].add(v)
            sets[v].add(u)
        return cls(sets, labels=labels)

    def edges(self) -> Iterable[tuple[int, int]]:
        """Yield each undirected edge once as (i, j) with i < j, in id order."""
        for i in range(self.n):
            for j in self.adjacency[i]:
                if j > i:
                    yield i, int(j)

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in self.adjacency[i]:
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        return bool(seen.all())

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, num_edges={self.num_edges})"


@dataclass
class PlantedCover:
    """A generated benchmark graph together with its ground-truth cover."""

    graph: Graph
    truth: "Cover"


def load_edge_list(source: str | IO[str]) -> Graph:
    """Parse an edge list into a :class:`Graph`.

    One edge per line as two whitespace-separated labels; blank lines and
    lines starting with ``#`` are ignored. Labels are remapped to internal
    ids in first-appearance order. Self-loops are dropped and duplicate
    edges collapsed; both counts are kept on the returned graph.

    Raises
    ------
    GraphParseError
        On a line with a token count other than two (the message names the
        line number), or if no usable edge remains.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source.read().splitlines()

    label_ids: dict[str, int] = {}
    edge_set: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphParseError(
                f"line {lineno}: expected two node labels, got {len(tokens)}"
            )
        ids = []
        for tok in tokens:
            if tok not in label_ids:
                label_ids[tok] = len(label_ids)
            ids.append(label_ids[tok])
        u, v = ids
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in edge_set:
            duplicates += 1
            continue
        edge_set.add(key)

    if not edge_set:
        raise GraphParseError("edge list contains no usable edges")

    n = len(label_ids)
    sets: list[set[int]] = [set() for _ in range(n)]
    for u, v in edge_set:
        sets[u].add(v)
        sets[v].add(u)
    labels = [""] * n
    for lab, i in label_ids.items():
        labels[i] = lab
    return Graph(
        sets,
        labels=labels,
        dropped_self_loops=self_loops,
        dropped_duplicates=duplicates,
    )


def write_edge_list(g: Graph, stream: IO[str]) -> None:
    """Write ``g`` as an edge list, one ``label label`` pair per line.

    Edges are emitted in internal-id order (i ascending, then j), so output
    is deterministic and reloading yields an isomorphic graph.
    """
    for i, j in g.edges():
        stream.write(f"{g.labels[i]} {g.labels[j]}\n")


def ring_of_cliques(c: int, s: int) -> PlantedCover:
    """Chain of ``c`` cliques of size ``s`` with one bridge per adjacent pair.

    The last node of clique t gains one edge to the second node of clique
    t+1, which makes it a member of both cliques in the ground truth. Nodes
    are labeled 1..c*s; edge count is c*s*(s-1)/2 + (c-1).

    Raises ``ValueError`` for c < 2 or s < 3.
    """
    from .encoding import Cover

    if c < 2:
        raise ValueError(f"need at least 2 cliques, got {c}")
    if s < 3:
        raise ValueError(f"need clique size of at least 3, got {s}")

    n = c * s
    edges: list[tuple[int, int]] = []
    for t in range(c):
        base = t * s
        for a in range(s):
            for b in range(a + 1, s):
                edges.append((base + a, base + b))
    for t in range(c - 1):
        edges.append((t * s + s - 1, (t + 1) * s + 1))

    labels = [str(i + 1) for i in range(n)]
    graph = Graph.from_edges(n, edges, labels=labels)

    communities = []
    for t in range(c):
        members = list(range(t * s, (t + 1) * s))
        if t > 0:
            members.insert(0, t * s - 1)  # bridge node of the previous clique
        communities.append(members)
    memberships: list[tuple[int, ...]] = []
    primary = np.empty(n, dtype=np.int64)
    for i in range(n):
        t = i // s
        primary[i] = t
        if t < c - 1 and i == t * s + s - 1:
            memberships.append((t, t + 1))
        else:
            memberships.append((t,))
    truth = Cover(communities=communities, memberships=memberships, k_max=2, primary=primary)
    return PlantedCover(graph=graph, truth=truth)


def gnp_random_graph(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Erdős–Rényi G(n, p) with labels 1..n; may be disconnected."""
    if n < 1:
        raise ValueError("need at least one node")
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must be in [0, 1]")
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                edges.append((u, v))
    return Graph.from_edges(n, edges, labels=[str(i + 1) for i in range(n)])
