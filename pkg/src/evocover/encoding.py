"""Two-segment chromosome encoding of overlapping partitions.

A chromosome pairs a primary-adhesion segment (per node, the neighbor it
adheres to, or itself) with a per-neighbor overlap-bit segment. Decoding the
first segment gives a disjoint partition as the connected components of the
adhesion edges; set overlap bits then extend that partition into a cover by
granting extra memberships in the communities of the pointed-at neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .graph import Graph

__all__ = [
    "Chromosome",
    "Cover",
    "DisjointPartition",
    "InvalidChromosomeError",
    "InvalidCoverError",
    "decode_primary",
    "extend_cover",
    "decode_cover",
    "extract_primary",
    "repair",
    "random_chromosome",
    "format_cover",
    "parse_cover",
]


class InvalidChromosomeError(ValueError):
    """Raised when a chromosome is structurally incompatible with its graph."""


class InvalidCoverError(ValueError):
    """Raised when a cover violates its invariants (coverage, empty community)."""


@dataclass(eq=False)
class Chromosome:
    """Value object holding the two genome segments.

    ``adhesion[i]`` is the primary-adhesion target of node i (a neighbor id,
    or i itself). ``overlap_bits`` is the per-neighbor bit segment flattened
    in the graph's CSR layout: the bits of node i occupy
    ``overlap_bits[g.offsets[i]:g.offsets[i+1]]``, one per neighbor in sorted
    adjacency order. Chromosomes are cheap to copy and safe to move between
    workers.
    """

    adhesion: np.ndarray
    overlap_bits: np.ndarray

    def copy(self) -> "Chromosome":
        return Chromosome(self.adhesion.copy(), self.overlap_bits.copy())

    def key(self) -> tuple[bytes, bytes]:
        """Canonical hashable identity, used for fitness caching."""
        return (self.adhesion.tobytes(), self.overlap_bits.tobytes())

    def bits_for(self, g: "Graph", i: int) -> np.ndarray:
        """View of node i's overlap bits (length ``g.degrees[i]``)."""
        return self.overlap_bits[g.offsets[i] : g.offsets[i + 1]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chromosome):
            return NotImplemented
        return np.array_equal(self.adhesion, other.adhesion) and np.array_equal(
            self.overlap_bits, other.overlap_bits
        )


@dataclass
class DisjointPartition:
    """Disjoint division of the node set: non-empty communities covering V.

    ``assignment[i]`` is the community id of node i; community ids are
    canonical (sorted by smallest contained node, ascending).
    """

    assignment: np.ndarray
    communities: list[list[int]]

    def to_cover(self, k_max: int = 1) -> "Cover":
        memberships = [(int(c),) for c in self.assignment]
        return Cover(
            communities=[list(c) for c in self.communities],
            memberships=memberships,
            k_max=k_max,
            primary=self.assignment.copy(),
        )


@dataclass(eq=False)
class Cover:
    """Overlapping partition: every node in 1..k_max communities.

    ``communities`` holds sorted member lists in canonical order (by smallest
    member, ties by member tuple); ``memberships[i]`` is the sorted tuple of
    community ids node i belongs to. ``primary`` (when known) records the
    single membership that survives extraction back to a disjoint partition;
    it is None for covers loaded from files.
    """

    communities: list[list[int]]
    memberships: list[tuple[int, ...]]
    k_max: int
    primary: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.memberships)

    def membership_counts(self) -> np.ndarray:
        return np.array([len(m) for m in self.memberships], dtype=np.int64)

    def as_sets(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(c) for c in self.communities)

    def overlap_nodes(self) -> list[int]:
        return [i for i, m in enumerate(self.memberships) if len(m) >= 2]

    def validate(self) -> None:
        if not self.communities:
            raise InvalidCoverError("cover has no communities")
        for cid, members in enumerate(self.communities):
            if not members:
                raise InvalidCoverError(f"community {cid} is empty")
        for i, mem in enumerate(self.memberships):
            if not 1 <= len(mem) <= self.k_max:
                raise InvalidCoverError(
                    f"node {i} has {len(mem)} memberships (allowed 1..{self.k_max})"
                )


def _check_structure(chrom: Chromosome, g: "Graph") -> None:
    if len(chrom.adhesion) != g.n:
        raise InvalidChromosomeError(
            f"adhesion segment has {len(chrom.adhesion)} loci for {g.n} nodes"
        )
    if len(chrom.overlap_bits) != 2 * g.num_edges:
        raise InvalidChromosomeError(
            f"overlap segment has {len(chrom.overlap_bits)} bits, "
            f"expected {2 * g.num_edges}"
        )


def decode_primary(chrom: Chromosome, g: "Graph") -> DisjointPartition:
    """Decode segment P: communities are the components of the adhesion edges.

    Raises :class:`InvalidChromosomeError` if any adhesion target is neither
    the node itself nor one of its neighbors.
    """
    _check_structure(chrom, g)
    n = g.n
    parent = list(range(n))
    adhesion = chrom.adhesion.tolist()
    sets = g.neighbor_sets
    for i, t in enumerate(adhesion):
        if t == i:
            continue
        if t not in sets[i]:
            raise InvalidChromosomeError(f"node {i} adheres to non-neighbor {t}")
        x = i
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        y = t
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            parent[y] = x

    roots: dict[int, int] = {}
    communities: list[list[int]] = []
    assignment_list = [0] * n
    for i in range(n):  # ascending scan => community ids sorted by min member
        x = i
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        cid = roots.get(x)
        if cid is None:
            cid = len(communities)
            roots[x] = cid
            communities.append([])
        communities[cid].append(i)
        assignment_list[i] = cid
    assignment = np.array(assignment_list, dtype=np.int64)
    return DisjointPartition(assignment=assignment, communities=communities)


def _foreign_joins(
    chrom: Chromosome, g: "Graph", assignment: np.ndarray, k_max: int
) -> dict[int, list[tuple[int, int]]]:
    """Per node with extra memberships: (target neighbor, foreign community)
    pairs in ascending neighbor order, capped at k_max - 1 distinct foreign
    communities. Only the first bit into each community counts."""
    joins: dict[int, list[tuple[int, int]]] = {}
    if k_max <= 1 or not chrom.overlap_bits.any():
        return joins
    nonzero = np.nonzero(chrom.overlap_bits)[0]
    owners = np.searchsorted(g.offsets, nonzero, side="right") - 1
    flat = g.flat_adjacency
    assign = assignment.tolist()
    for pos, i in zip(nonzero.tolist(), owners.tolist()):
        j = int(flat[pos])
        cj = assign[j]
        if cj == assign[i]:
            continue
        mine = joins.get(i)
        if mine is None:
            mine = joins[i] = []
        elif any(c == cj for _, c in mine):
            continue
        if len(mine) < k_max - 1:
            mine.append((j, cj))
    return joins


def _cover_from_joins(
    joins: dict[int, list[tuple[int, int]]],
    partition: DisjointPartition,
    g: "Graph",
    k_max: int,
) -> Cover:
    if not joins:
        return Cover(
            communities=[list(c) for c in partition.communities],
            memberships=[(c,) for c in partition.assignment.tolist()],
            k_max=k_max,
            primary=partition.assignment.copy(),
        )
    assign = partition.assignment.tolist()
    members: list[set[int]] = [set(c) for c in partition.communities]
    extra: dict[int, list[int]] = {}
    for i, mine in joins.items():
        extra[i] = [cj for _, cj in mine]
        for cj in extra[i]:
            members[cj].add(i)

    # Overlap members can change a community's smallest node, so re-canonicalize.
    order = sorted(range(len(members)), key=lambda c: sorted(members[c]))
    remap = {old: new for new, old in enumerate(order)}
    communities = [sorted(members[old]) for old in order]
    memberships = [
        tuple(sorted([remap[assign[i]], *(remap[c] for c in extra[i])]))
        if i in extra
        else (remap[assign[i]],)
        for i in range(g.n)
    ]
    primary = np.array([remap[c] for c in assign], dtype=np.int64)
    return Cover(communities=communities, memberships=memberships, k_max=k_max, primary=primary)


def extend_cover(
    chrom: Chromosome, partition: DisjointPartition, g: "Graph", k_max: int
) -> Cover:
    """Extend the primary partition into a cover using the overlap bits.

    A set bit of node i pointing at neighbor j in a foreign community adds i
    to that community; repeated bits into one community add nothing, and
    memberships are capped at ``k_max`` (bits processed in ascending neighbor
    order, excess ignored).
    """
    joins = _foreign_joins(chrom, g, partition.assignment, k_max)
    return _cover_from_joins(joins, partition, g, k_max)


def decode_cover(chrom: Chromosome, g: "Graph", k_max: int) -> Cover:
    """Full genotype-to-phenotype map: decode segment P, extend with segment O."""
    return extend_cover(chrom, decode_primary(chrom, g), g, k_max)


def extract_primary(cover: Cover) -> DisjointPartition:
    """Collapse a cover back to its primary partition (extraction property)."""
    if cover.primary is None:
        raise InvalidCoverError("cover does not carry primary memberships")
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(cover.primary.tolist()):
        groups.setdefault(c, []).append(i)
    order = sorted(groups, key=lambda c: groups[c][0])
    remap = {old: new for new, old in enumerate(order)}
    communities = [groups[old] for old in order]
    assignment = np.array([remap[int(c)] for c in cover.primary], dtype=np.int64)
    return DisjointPartition(assignment=assignment, communities=communities)


def repair(
    chrom: Chromosome,
    g: "Graph",
    k_max: int,
    partition: DisjointPartition | None = None,
) -> Chromosome:
    """Clear phenotype-neutral and over-cap overlap bits.

    Bits pointing inside the node's own primary community are inert and
    cleared; bits beyond the membership cap (first k_max - 1 distinct foreign
    communities win, in ascending neighbor order) are cleared as well. The
    decoded cover is unchanged. Idempotent. ``partition`` may pass in a
    precomputed ``decode_primary`` result (it depends only on the adhesion
    segment, which repair never touches).
    """
    if not chrom.overlap_bits.any():
        return chrom.copy()
    if partition is None:
        partition = decode_primary(chrom, g)
    assignment = partition.assignment
    out = chrom.copy()
    bits = out.overlap_bits
    nonzero = np.nonzero(bits)[0]
    owners = np.searchsorted(g.offsets, nonzero, side="right") - 1
    flat = g.flat_adjacency
    kept: dict[int, set[int]] = {}
    for pos, i in zip(nonzero.tolist(), owners.tolist()):
        cj = int(assignment[flat[pos]])
        if cj == assignment[i]:
            bits[pos] = 0
            continue
        mine = kept.setdefault(i, set())
        if cj in mine:
            continue
        if len(mine) < k_max - 1:
            mine.add(cj)
        else:
            bits[pos] = 0
    return out


def random_chromosome(
    g: "Graph", p_overlap: float, rng: np.random.Generator, k_max: int
) -> Chromosome:
    """Uniform random genome: adhesion to a random neighbor (self only for
    isolated nodes), each overlap bit set independently with ``p_overlap``,
    then repaired."""
    if not 0.0 <= p_overlap <= 1.0:
        raise ValueError("p_overlap must be in [0, 1]")
    n = g.n
    adhesion = np.arange(n, dtype=np.int64)
    deg = g.degrees
    active = deg > 0
    if active.any():
        picks = (rng.random(n) * deg).astype(np.int64)
        idx = g.offsets[:-1] + picks
        adhesion[active] = g.flat_adjacency[idx[active]]
    bits = (rng.random(2 * g.num_edges) < p_overlap).astype(np.uint8)
    return repair(Chromosome(adhesion, bits), g, k_max)


def adhesion_targets(
    chrom: Chromosome, g: "Graph", assignment: np.ndarray, k_max: int
) -> list[list[int]]:
    """Per node, the neighbor targets of its foreign adhesions, in the order
    the memberships were granted (ascending neighbor order)."""
    joins = _foreign_joins(chrom, g, assignment, k_max)
    out: list[list[int]] = [[] for _ in range(g.n)]
    for i, mine in joins.items():
        out[i] = [j for j, _ in mine]
    return out


def format_cover(cover: Cover, g: "Graph") -> str:
    """Serialize a cover: one community per line, space-separated original
    labels, lines in canonical community order."""
    lines = []
    for members in cover.communities:
        lines.append(" ".join(g.labels[i] for i in members))
    return "\n".join(lines) + "\n"


def parse_cover(source: str | IO[str], g: "Graph") -> Cover:
    """Load a cover in the format written by :func:`format_cover`.

    Validates coverage: every node of ``g`` must appear in at least one
    community and labels must exist in the graph.
    """
    text = source if isinstance(source, str) else source.read()
    label_to_id = {lab: i for i, lab in enumerate(g.labels)}
    raw: list[set[int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        members = set()
        for tok in line.split():
            if tok not in label_to_id:
                raise InvalidCoverError(f"line {lineno}: unknown node label {tok!r}")
            members.add(label_to_id[tok])
        raw.append(members)
    if not raw:
        raise InvalidCoverError("cover file contains no communities")

    raw.sort(key=sorted)
    memberships_sets: list[list[int]] = [[] for _ in range(g.n)]
    for cid, members in enumerate(raw):
        for i in members:
            memberships_sets[i].append(cid)
    for i, mem in enumerate(memberships_sets):
        if not mem:
            raise InvalidCoverError(f"node {g.labels[i]!r} is not covered")
    k_max = max(len(m) for m in memberships_sets)
    return Cover(
        communities=[sorted(c) for c in raw],
        memberships=[tuple(m) for m in memberships_sets],
        k_max=k_max,
        primary=None,
    )
