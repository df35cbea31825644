"""Overlapping community detection for undirected networks.

Covers are found by evolving two-segment chromosomes (a disjoint primary
partition plus a per-neighbor overlap extension) under an overlapping
modularity fitness, with per-locus mutation rates adapted to how informative
the population's alleles have become.
"""

from .bench import SimilarityScore, brute_force_best, greedy_baseline, overlapping_nmi
from .encoding import (
    Chromosome,
    Cover,
    DisjointPartition,
    InvalidChromosomeError,
    InvalidCoverError,
    decode_cover,
    decode_primary,
    extend_cover,
    extract_primary,
    format_cover,
    parse_cover,
    random_chromosome,
    repair,
)
from .evolution import GAConfig, Population, RunReport, run
from .fitness import (
    BelongingMatrix,
    belonging_coefficients,
    disjoint_modularity,
    overlapping_modularity,
)
from .graph import (
    Graph,
    GraphParseError,
    PlantedCover,
    gnp_random_graph,
    load_edge_list,
    ring_of_cliques,
    write_edge_list,
)
from .informativeness import (
    AlleleDistribution,
    InformativenessTable,
    build_table,
    community_bias,
    locus_kld,
    membership_kld,
    overall_informativeness,
    primary_informativeness,
)

__version__ = "0.1.0"

__all__ = [
    "AlleleDistribution",
    "BelongingMatrix",
    "Chromosome",
    "Cover",
    "DisjointPartition",
    "GAConfig",
    "Graph",
    "GraphParseError",
    "InformativenessTable",
    "InvalidChromosomeError",
    "InvalidCoverError",
    "PlantedCover",
    "Population",
    "RunReport",
    "SimilarityScore",
    "belonging_coefficients",
    "brute_force_best",
    "build_table",
    "community_bias",
    "decode_cover",
    "decode_primary",
    "disjoint_modularity",
    "extend_cover",
    "extract_primary",
    "format_cover",
    "gnp_random_graph",
    "greedy_baseline",
    "load_edge_list",
    "locus_kld",
    "membership_kld",
    "overall_informativeness",
    "overlapping_modularity",
    "overlapping_nmi",
    "parse_cover",
    "primary_informativeness",
    "random_chromosome",
    "repair",
    "ring_of_cliques",
    "run",
    "write_edge_list",
]
