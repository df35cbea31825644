"""Evaluation utilities: cover similarity and independent search oracles.

``overlapping_nmi`` compares covers; ``greedy_baseline`` is an agglomerative
modularity merger over disjoint partitions; ``brute_force_best`` enumerates
every cover of a tiny graph and is the ground truth the evolutionary search
is checked against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, TYPE_CHECKING

import numpy as np

from .encoding import Cover, DisjointPartition
from .fitness import _q_uniform, disjoint_modularity

if TYPE_CHECKING:
    from .graph import Graph

__all__ = [
    "SimilarityScore",
    "overlapping_nmi",
    "greedy_baseline",
    "brute_force_best",
    "set_partitions",
]

_BRUTE_FORCE_MAX_NODES = 10
_NO_PRUNE_MAX_NODES = 6


@dataclass
class SimilarityScore:
    """Similarity of two covers in [0, 1]; 1 iff identical up to relabeling."""

    value: float
    method: str = "overlapping-nmi"


def _h(p: float) -> float:
    return -p * math.log(p) if p > 0.0 else 0.0


def _conditional_terms(a_sets: list[set[int]], b_sets: list[set[int]], n: int) -> float:
    """Mean normalized conditional entropy of the communities of cover A
    given cover B, each community treated as a binary membership variable.

    For every community of A the best (lowest-entropy) admissible match in B
    is used; a pairing is admissible only when it conveys more information
    than it obscures, i.e. h(p11)+h(p00) >= h(p01)+h(p10). Without any
    admissible match the full marginal entropy is charged.
    """
    total = 0.0
    for a in a_sets:
        pa = len(a) / n
        h_a = _h(pa) + _h(1.0 - pa)
        best = h_a
        for b in b_sets:
            n11 = len(a & b)
            n10 = len(a) - n11
            n01 = len(b) - n11
            n00 = n - n11 - n10 - n01
            p11, p10, p01, p00 = n11 / n, n10 / n, n01 / n, n00 / n
            if _h(p11) + _h(p00) < _h(p01) + _h(p10):
                continue
            pb = len(b) / n
            joint = _h(p11) + _h(p10) + _h(p01) + _h(p00)
            cond = joint - (_h(pb) + _h(1.0 - pb))
            if cond < best:
                best = cond
        if h_a > 0.0:
            total += max(0.0, best) / h_a
        # h_a == 0 means the community is all of V; it is reproduced for free.
    return total / len(a_sets)


def overlapping_nmi(a: Cover, b: Cover) -> SimilarityScore:
    """Extended normalized mutual information between two covers.

    Symmetric, invariant to community order, 1.0 exactly for identical
    covers. Raises ``ValueError`` when the node sets differ.
    """
    if a.n != b.n:
        raise ValueError(f"covers span different node sets ({a.n} vs {b.n} nodes)")
    n = a.n
    a_sets = [set(c) for c in a.communities]
    b_sets = [set(c) for c in b.communities]
    value = 1.0 - 0.5 * (
        _conditional_terms(a_sets, b_sets, n) + _conditional_terms(b_sets, a_sets, n)
    )
    return SimilarityScore(value=min(1.0, max(0.0, value)))


def greedy_baseline(g: "Graph") -> tuple[DisjointPartition, float]:
    """Agglomerative modularity merging from singletons.

    Repeatedly merges the community pair with the largest modularity gain
    until no strictly positive merge remains; ties go to the smallest pair.
    Returns the partition and its disjoint modularity.
    """
    if g.num_edges < 1:
        raise ValueError("baseline requires at least one edge")
    L = float(g.num_edges)
    two_l_sq = (2.0 * L) ** 2

    comm_of = list(range(g.n))
    members: dict[int, list[int]] = {i: [i] for i in range(g.n)}
    degsum: dict[int, float] = {i: float(g.degrees[i]) for i in range(g.n)}
    between: dict[tuple[int, int], int] = {}
    for i, j in g.edges():
        between[(i, j)] = between.get((i, j), 0) + 1

    while True:
        best_delta = 0.0
        best_pair: tuple[int, int] | None = None
        for (a, b), edges_ab in sorted(between.items()):
            delta = edges_ab / L - 2.0 * degsum[a] * degsum[b] / two_l_sq
            if delta > best_delta:
                best_delta = delta
                best_pair = (a, b)
        if best_pair is None:
            break
        a, b = best_pair  # a < b: b is absorbed
        for i in members[b]:
            comm_of[i] = a
        members[a].extend(members[b])
        del members[b]
        degsum[a] += degsum.pop(b)
        merged: dict[tuple[int, int], int] = {}
        for (x, y), cnt in between.items():
            x = a if x == b else x
            y = a if y == b else y
            if x == y:
                continue
            key = (x, y) if x < y else (y, x)
            merged[key] = merged.get(key, 0) + cnt
        between = merged

    order = sorted(members, key=lambda c: min(members[c]))
    communities = [sorted(members[c]) for c in order]
    assignment = np.empty(g.n, dtype=np.int64)
    for cid, mem in enumerate(communities):
        for i in mem:
            assignment[i] = cid
    partition = DisjointPartition(assignment=assignment, communities=communities)
    return partition, disjoint_modularity(partition, g)


def set_partitions(n: int) -> Iterator[list[list[int]]]:
    """All partitions of {0..n-1} into non-empty blocks, blocks ordered by
    first appearance (hence by smallest member)."""
    codes = [0] * n
    maxes = [0] * n
    while True:
        k = max(codes) + 1 if n else 0
        blocks: list[list[int]] = [[] for _ in range(k)]
        for i, c in enumerate(codes):
            blocks[c].append(i)
        yield blocks
        # next restricted-growth string
        i = n - 1
        while i > 0 and codes[i] == maxes[i - 1] + 1:
            codes[i] = 0
            i -= 1
        if i == 0:
            return
        codes[i] += 1
        m = max(maxes[i - 1], codes[i])
        for j in range(i, n):
            maxes[j] = m
            if j > i:
                codes[j] = 0


def _block_connected(block: list[int], g: "Graph") -> bool:
    if len(block) == 1:
        return True
    inside = set(block)
    seen = {block[0]}
    stack = [block[0]]
    while stack:
        i = stack.pop()
        for j in g._adj_lists[i]:
            if j in inside and j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(block)


def brute_force_best(
    g: "Graph", k_max: int, prune: bool = True, connected_blocks: bool = False
) -> tuple[Cover, float]:
    """Exhaustive maximum-modularity cover of a tiny graph (n <= 10).

    Enumerates every disjoint partition and, on top of each, every assignment
    of up to ``k_max - 1`` extra memberships per node. With ``prune`` (the
    default) a node may only join foreign communities containing at least one
    of its neighbors, matching what the chromosome encoding can express; the
    unpruned search (n <= 6) exists to validate that restriction. With
    ``connected_blocks`` the primary partition is additionally restricted to
    connected blocks, which makes the searched space exactly the phenotype
    space of the chromosome encoding (primary communities are components of
    adhesion edges, hence always connected). Ties are broken toward the
    lexicographically smallest canonical cover.
    """
    if g.n > _BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"brute force is limited to {_BRUTE_FORCE_MAX_NODES} nodes")
    if not prune and g.n > _NO_PRUNE_MAX_NODES:
        raise ValueError(f"unpruned brute force is limited to {_NO_PRUNE_MAX_NODES} nodes")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if g.num_edges < 1:
        raise ValueError("brute force requires at least one edge")

    n = g.n
    adj = g._adj_lists
    deg = [len(row) for row in adj]
    two_l = 2.0 * g.num_edges
    # The DFS scores covers incrementally (cheap deltas per extra membership);
    # rounding there can drift a few ulp from the canonical evaluation, so
    # near-best leaves are kept and re-scored exactly afterwards.
    margin = 1e-9

    best_inc = -math.inf
    near: list[tuple[float, int, tuple[tuple[int, ...], ...]]] = []

    for pidx, blocks in enumerate(set_partitions(n)):
        if connected_blocks and not all(_block_connected(b, g) for b in blocks):
            continue
        k = len(blocks)
        own = [0] * n
        in_c = [bytearray(n) for _ in range(k)]
        for cid, block in enumerate(blocks):
            for i in block:
                own[i] = cid
                in_c[cid][i] = 1

        e_in = [0.0] * k
        bnd = [0.0] * k
        for cid, block in enumerate(blocks):
            flags = in_c[cid]
            inner = 0
            cut = 0
            for i in block:
                for j in adj[i]:
                    if flags[j]:
                        inner += 1
                    else:
                        cut += 1
            e_in[cid] = float(inner)
            bnd[cid] = float(cut)

        branch: list[int] = []
        options: list[list[tuple[int, ...]]] = []
        for i in range(n):
            if prune:
                cands = [
                    c
                    for c in range(k)
                    if c != own[i] and any(in_c[c][j] for j in adj[i])
                ]
            else:
                cands = [c for c in range(k) if c != own[i]]
            opts: list[tuple[int, ...]] = [()]
            for take in range(1, k_max):
                opts.extend(itertools.combinations(cands, take))
            if len(opts) > 1:
                branch.append(i)
                options.append(opts)

        w = [1.0] * n
        m_cnt = [1] * n
        memb = [[own[i]] for i in range(n)]
        choices: list[tuple[int, ...]] = [()] * len(branch)

        def leaf() -> None:
            nonlocal best_inc
            total = 0.0
            for c in range(k):
                e = e_in[c]
                total += e - (e + bnd[c]) ** 2 / two_l
            q = total / two_l
            if q > best_inc - margin:
                near.append((q, pidx, tuple(choices)))
                if q > best_inc:
                    best_inc = q

        def apply_join(i: int, c: int) -> None:
            w_old = w[i]
            w_new = 1.0 / (m_cnt[i] + 1)
            dw = w_new - w_old
            for d in memb[i]:
                flags = in_c[d]
                s = 0.0
                cnt = 0
                for j in adj[i]:
                    if flags[j]:
                        s += w[j]
                        cnt += 1
                e_in[d] += 2.0 * dw * s
                bnd[d] += dw * (deg[i] - cnt)
            flags = in_c[c]
            s = 0.0
            cnt = 0
            for j in adj[i]:
                if flags[j]:
                    s += w[j]
                    cnt += 1
            e_in[c] += 2.0 * w_new * s
            bnd[c] += w_new * (deg[i] - cnt) - s
            flags[i] = 1
            memb[i].append(c)
            w[i] = w_new
            m_cnt[i] += 1

        def rec(t: int) -> None:
            if t == len(branch):
                leaf()
                return
            i = branch[t]
            for opt in options[t]:
                choices[t] = opt
                if not opt:
                    rec(t + 1)
                    continue
                saved_e = e_in[:]
                saved_b = bnd[:]
                saved = (w[i], m_cnt[i])
                for c in opt:
                    apply_join(i, c)
                rec(t + 1)
                e_in[:] = saved_e
                bnd[:] = saved_b
                for c in opt:
                    in_c[c][i] = 0
                del memb[i][1:]
                w[i], m_cnt[i] = saved
            choices[t] = ()

        rec(0)

    # Exact re-scoring of the near-best leaves with the canonical evaluator.
    near = [entry for entry in near if entry[0] >= best_inc - margin]
    wanted = {pidx for _, pidx, _ in near}
    partition_of: dict[int, list[list[int]]] = {}
    for pidx, blocks in enumerate(set_partitions(n)):
        if pidx in wanted:
            partition_of[pidx] = [list(b) for b in blocks]
        if len(partition_of) == len(wanted):
            break

    best_q = -math.inf
    best_key: tuple[tuple[int, ...], ...] | None = None
    best_cover: Cover | None = None
    for _, pidx, combo in near:
        blocks = partition_of[pidx]
        k = len(blocks)
        own = [0] * n
        in_c = [bytearray(n) for _ in range(k)]
        for cid, block in enumerate(blocks):
            for i in block:
                own[i] = cid
                in_c[cid][i] = 1
        if prune:
            branch = [
                i
                for i in range(n)
                if any(
                    c != own[i] and any(in_c[c][j] for j in adj[i]) for c in range(k)
                )
            ]
        else:
            branch = [i for i in range(n) if k > 1]
        extras: dict[int, tuple[int, ...]] = dict(zip(branch, combo))
        members = [list(b) for b in blocks]
        weight = [1.0] * n
        for i, extra in extras.items():
            for c in extra:
                members[c].append(i)
            weight[i] = 1.0 / (1 + len(extra))
        ordered = sorted(sorted(mem) for mem in members)
        q = _q_uniform(ordered, weight, g)
        if q < best_q:
            continue
        key = tuple(tuple(mem) for mem in ordered)
        if q > best_q or (best_key is not None and key < best_key):
            best_q = q
            best_key = key
            order = sorted(range(k), key=lambda c: sorted(members[c]))
            remap = {old: new for new, old in enumerate(order)}
            memberships = [
                tuple(sorted([remap[own[i]], *(remap[c] for c in extras.get(i, ()))]))
                for i in range(n)
            ]
            best_cover = Cover(
                communities=[sorted(members[old]) for old in order],
                memberships=memberships,
                k_max=k_max,
                primary=np.array([remap[own[i]] for i in range(n)], dtype=np.int64),
            )

    assert best_cover is not None
    return best_cover, best_q
