"""Population statistics that drive adaptive mutation.

Informativeness of a locus is the Kullback-Leibler divergence of its
empirical allele distribution from the uniform one (natural log, 0*log 0 = 0).
Converged loci score high and are protected from mutation; scattered loci
score near zero and are mutated aggressively.

Per node the module reports:

* primary informativeness: KLD of the primary-adhesion allele over the
  alphabet Nbs(i) plus self,
* membership KLD: divergence of the node's membership-count distribution
  from uniform over 1..K,
* overall informativeness: the mean normalized bias of the node's adhesion
  targets, one term per membership of the reference (best) individual,
* a combined mutation-priority score blending the last two with a convex
  weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TYPE_CHECKING

import numpy as np

from .encoding import Chromosome, adhesion_targets, decode_primary

if TYPE_CHECKING:
    from .graph import Graph

__all__ = [
    "AlleleDistribution",
    "InformativenessTable",
    "locus_kld",
    "primary_informativeness",
    "membership_kld",
    "community_bias",
    "overall_informativeness",
    "build_table",
]

# Per-individual decoded view: (primary assignment, per-node foreign adhesion
# targets in grant order). Evolution passes these from its fitness cache so
# the population is decoded only once per generation.
Phenotype = tuple[np.ndarray, list[list[int]]]


@dataclass
class AlleleDistribution:
    """Empirical allele distribution at one locus.

    ``probabilities`` covers the observed alleles only and sums to 1;
    ``alphabet_size`` is the number of values the locus could take.
    """

    locus: int
    alphabet_size: int
    probabilities: np.ndarray


@dataclass
class InformativenessTable:
    """Per-node informativeness snapshot of one generation."""

    pinf: np.ndarray
    oinf: np.ndarray
    membership_kld: np.ndarray
    combined: np.ndarray


def locus_kld(dist: AlleleDistribution) -> float:
    """KLD of an empirical distribution from uniform over its alphabet.

    Zero iff uniform, log(alphabet size) iff degenerate; zero-probability
    alleles contribute nothing.
    """
    if dist.alphabet_size < 1:
        raise ValueError("alphabet size must be at least 1")
    size = float(dist.alphabet_size)
    total = 0.0
    for p in np.asarray(dist.probabilities, dtype=float):
        if p > 0.0:
            total += p * math.log(size * p)
    return total


def _decode_population(
    chroms: Sequence[Chromosome], g: "Graph", k_max: int
) -> list[Phenotype]:
    phens: list[Phenotype] = []
    for chrom in chroms:
        assignment = decode_primary(chrom, g).assignment
        phens.append((assignment, adhesion_targets(chrom, g, assignment, k_max)))
    return phens


def primary_informativeness(chroms: Sequence[Chromosome], g: "Graph") -> np.ndarray:
    """Per-node KLD of the primary-adhesion allele across the population.

    The alphabet of node i is its neighbors plus itself, so a fully converged
    locus scores log(degree(i) + 1).
    """
    if not chroms:
        raise ValueError("population is empty")
    pop = len(chroms)
    alleles = np.stack([c.adhesion for c in chroms])
    out = np.empty(g.n)
    for i in range(g.n):
        _, counts = np.unique(alleles[:, i], return_counts=True)
        dist = AlleleDistribution(i, int(g.degrees[i]) + 1, counts / pop)
        out[i] = locus_kld(dist)
    return out


def membership_kld(
    chroms: Sequence[Chromosome],
    g: "Graph",
    k_max: int,
    phenotypes: Sequence[Phenotype] | None = None,
) -> np.ndarray:
    """Per-node KLD of the membership-count distribution vs uniform over 1..K."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if not chroms:
        raise ValueError("population is empty")
    if phenotypes is None:
        phenotypes = _decode_population(chroms, g, k_max)
    pop = len(phenotypes)
    counts = np.zeros((g.n, k_max), dtype=np.int64)
    for _, foreign in phenotypes:
        for i in range(g.n):
            counts[i, len(foreign[i])] += 1  # M_i = 1 + foreign memberships
    out = np.empty(g.n)
    for i in range(g.n):
        probs = counts[i][counts[i] > 0] / pop
        out[i] = locus_kld(AlleleDistribution(i, k_max, probs))
    return out


def _normalized_bias(target_counts: dict[int, int], total: int, h_bar: float) -> float:
    """Eq-style bias of an adhesion-target distribution, normalized to [0, 1].

    ``h_bar`` is the (possibly fractional) number of alleles effectively
    allowed; at or below 1 the locus has no freedom and the bias is 1 by
    definition, as it is when nothing was observed.
    """
    if h_bar <= 1.0 or total == 0:
        return 1.0
    log_h = math.log(h_bar)
    acc = 0.0
    for target in sorted(target_counts):  # fixed order: bit-identical results
        p = target_counts[target] / total
        acc += p * math.log(h_bar * p)
    return min(1.0, max(0.0, acc / log_h))


def _bias_terms(
    i: int,
    ref_m: int,
    chroms: Sequence[Chromosome],
    g: "Graph",
    phenotypes: Sequence[Phenotype],
) -> np.ndarray:
    pop = len(chroms)
    degree = int(g.degrees[i])
    out = np.empty(ref_m)

    # First adhesion: the primary allele, alphabet = the node's neighbors.
    counts: dict[int, int] = {}
    for chrom in chroms:
        target = int(chrom.adhesion[i])
        if target != i:
            counts[target] = counts.get(target, 0) + 1
    out[0] = _normalized_bias(counts, pop, float(degree))

    for k in range(2, ref_m + 1):
        counts = {}
        present = 0
        remaining = 0.0
        for chrom, (_, foreign) in zip(chroms, phenotypes):
            mine = foreign[i]
            if len(mine) >= k - 1:
                target = mine[k - 2]
                counts[target] = counts.get(target, 0) + 1
                present += 1
            used = (1 if int(chrom.adhesion[i]) != i else 0) + min(k - 2, len(mine))
            remaining += degree - used
        out[k - 1] = _normalized_bias(counts, present, remaining / pop)
    return out


def community_bias(
    chroms: Sequence[Chromosome],
    g: "Graph",
    i: int,
    reference: Chromosome,
    k_max: int,
    phenotypes: Sequence[Phenotype] | None = None,
) -> np.ndarray:
    """Normalized adhesion-target biases u_{i,1..M_i} of node ``i``.

    ``reference`` (the best individual so far) fixes M_i, the number of terms.
    Each term is in [0, 1]: 0 for a uniform target distribution, 1 when the
    population has converged or the locus has no freedom.
    """
    if not chroms:
        raise ValueError("population is empty")
    if phenotypes is None:
        phenotypes = _decode_population(chroms, g, k_max)
    ref_assignment = decode_primary(reference, g).assignment
    ref_m = 1 + len(adhesion_targets(reference, g, ref_assignment, k_max)[i])
    return _bias_terms(i, ref_m, chroms, g, phenotypes)


def overall_informativeness(
    chroms: Sequence[Chromosome],
    g: "Graph",
    reference: Chromosome,
    k_max: int,
    phenotypes: Sequence[Phenotype] | None = None,
) -> np.ndarray:
    """Per-node mean of the adhesion-target biases over the reference's M_i."""
    if not chroms:
        raise ValueError("population is empty")
    if phenotypes is None:
        phenotypes = _decode_population(chroms, g, k_max)
    ref_assignment = decode_primary(reference, g).assignment
    ref_foreign = adhesion_targets(reference, g, ref_assignment, k_max)
    out = np.empty(g.n)
    for i in range(g.n):
        terms = _bias_terms(i, 1 + len(ref_foreign[i]), chroms, g, phenotypes)
        out[i] = float(terms.mean())
    return out


def build_table(
    chroms: Sequence[Chromosome],
    g: "Graph",
    reference: Chromosome,
    k_max: int,
    membership_weight: float = 0.5,
    phenotypes: Sequence[Phenotype] | None = None,
) -> InformativenessTable:
    """Assemble the full per-node table for one generation.

    The combined mutation-priority score is
    ``membership_weight * membership_kld/log(K) + (1 - membership_weight) * oinf``
    (the normalizer is defined as 1 when K == 1); it lies in [0, 1].
    """
    if not 0.0 <= membership_weight <= 1.0:
        raise ValueError("membership_weight must be in [0, 1]")
    if phenotypes is None:
        phenotypes = _decode_population(chroms, g, k_max)
    pinf = primary_informativeness(chroms, g)
    mkld = membership_kld(chroms, g, k_max, phenotypes=phenotypes)
    oinf = overall_informativeness(chroms, g, reference, k_max, phenotypes=phenotypes)
    if k_max > 1:
        norm_m = mkld / math.log(k_max)
    else:
        norm_m = np.ones_like(mkld)
    combined = membership_weight * norm_m + (1.0 - membership_weight) * oinf
    np.clip(combined, 0.0, 1.0, out=combined)
    return InformativenessTable(pinf=pinf, oinf=oinf, membership_kld=mkld, combined=combined)
