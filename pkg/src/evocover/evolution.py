"""Evolutionary search for high-modularity covers.

Generational loop with elitism: tournament selection, per-node uniform
crossover (each node's adhesion allele and overlap bits travel together),
informativeness-adaptive mutation, and an occasional greedy reassignment of
the least informative loci. Every random draw flows from a single seed;
offspring streams are derived from (seed, generation, pair index), so
intra-generation work could be parallelized without changing any result.
"""

from __future__ import annotations

import math
import multiprocessing
import os
import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence, TYPE_CHECKING

import numpy as np

from .encoding import (
    Chromosome,
    Cover,
    _foreign_joins,
    decode_primary,
    extend_cover,
    random_chromosome,
    repair,
)
from .fitness import _q_uniform
from .informativeness import InformativenessTable, Phenotype, build_table

if TYPE_CHECKING:
    from .graph import Graph

__all__ = [
    "GAConfig",
    "Population",
    "RunReport",
    "Evaluator",
    "initialize",
    "tournament_select",
    "crossover",
    "adaptive_mutate",
    "reassignment",
    "run",
]

# Reassignment is applied to each offspring with this probability and touches
# at most ceil(n / REASSIGN_NODE_DIVISOR) of the least informative nodes.
REASSIGN_PROBABILITY = 0.2
REASSIGN_NODE_DIVISOR = 20

_CACHE_LIMIT = 200_000


@dataclass
class GAConfig:
    """Search parameters; defaults are sized for desk-scale networks."""

    population_size: int = 100
    generations: int = 500
    stagnation_window: int = 100
    elitism_count: int = 2
    tournament_size: int = 3
    crossover_rate: float = 0.8
    p_min: float = 0.02
    p_max: float = 0.3
    p_overlap_init: float = 0.05
    k_max: int = 2
    membership_weight: float = 0.5
    seed: int | None = None

    def validate(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise ValueError("need 0 <= p_min <= p_max <= 1")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.generations < 0:
            raise ValueError("generations must be nonnegative")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be positive")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValueError("elitism_count must fit in the population")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must be in [0, 1]")
        if not 0.0 <= self.p_overlap_init <= 1.0:
            raise ValueError("p_overlap_init must be in [0, 1]")
        if not 0.0 <= self.membership_weight <= 1.0:
            raise ValueError("membership_weight must be in [0, 1]")


@dataclass
class Population:
    """One generation: individuals with their fitness and the champion so far."""

    individuals: list[Chromosome]
    fitness: np.ndarray
    generation: int
    best_chromosome: Chromosome
    best_fitness: float


@dataclass
class RunReport:
    """Outcome of a run: champion cover, fitness trace, and the config echo."""

    best_cover: Cover
    best_q: float
    q_trace: list[float]
    generations_run: int
    wall_time_s: float
    config: GAConfig


def _score_joins(joins, partition, g: "Graph") -> float:
    """Fitness from a decoded partition plus foreign joins, skipping the Cover
    object; bit-identical to overlapping_modularity of the built cover."""
    if joins:
        members = [list(c) for c in partition.communities]
        weight = [1.0] * g.n
        for i, mine in joins.items():
            weight[i] = 1.0 / (1 + len(mine))
            for _, cj in mine:
                members[cj].append(i)
        ordered = sorted(sorted(m) for m in members)
        return _q_uniform(ordered, weight, g)
    return _q_uniform(partition.communities, [1.0] * g.n, g)


def evaluate_chromosome(
    chrom: Chromosome, g: "Graph", k_max: int
) -> tuple[float, np.ndarray, list[list[int]]]:
    """Pure genotype evaluation: (fitness, primary assignment, foreign targets)."""
    partition = decode_primary(chrom, g)
    joins = _foreign_joins(chrom, g, partition.assignment, k_max)
    q = _score_joins(joins, partition, g)
    foreign: list[list[int]] = [[] for _ in range(g.n)]
    for i, mine in joins.items():
        foreign[i] = [j for j, _ in mine]
    return q, partition.assignment, foreign


_worker_state: dict = {}


def _init_worker(g: "Graph", k_max: int) -> None:
    _worker_state["graph"] = g
    _worker_state["k_max"] = k_max


def _worker_eval(chrom: Chromosome) -> tuple[float, np.ndarray, list[list[int]]]:
    return evaluate_chromosome(chrom, _worker_state["graph"], _worker_state["k_max"])


class Evaluator:
    """Fitness cache keyed by the canonical (repaired) chromosome bytes.

    Clones dominate converged populations, so caching collapses most of the
    per-generation evaluation cost. Cached phenotypes also feed the
    informativeness statistics without re-decoding. A second cache keyed by
    the adhesion segment alone serves ``decode``, which repair and evaluation
    would otherwise both recompute.
    """

    def __init__(self, g: "Graph", k_max: int):
        self.graph = g
        self.k_max = k_max
        self._cache: dict[tuple[bytes, bytes], tuple[float, np.ndarray, list[list[int]]]] = {}
        self._decoded: dict[bytes, object] = {}

    def decode(self, chrom: Chromosome):
        key = chrom.adhesion.tobytes()
        partition = self._decoded.get(key)
        if partition is None:
            partition = decode_primary(chrom, self.graph)
            if len(self._decoded) >= _CACHE_LIMIT:
                self._decoded.clear()
            self._decoded[key] = partition
        return partition

    def repair(self, chrom: Chromosome) -> Chromosome:
        if not chrom.overlap_bits.any():
            return chrom
        return repair(chrom, self.graph, self.k_max, partition=self.decode(chrom))

    def _entry(self, chrom: Chromosome) -> tuple[float, np.ndarray, list[list[int]]]:
        key = chrom.key()
        entry = self._cache.get(key)
        if entry is None:
            partition = self.decode(chrom)
            joins = _foreign_joins(chrom, self.graph, partition.assignment, self.k_max)
            q = _score_joins(joins, partition, self.graph)
            foreign: list[list[int]] = [[] for _ in range(self.graph.n)]
            for i, mine in joins.items():
                foreign[i] = [j for j, _ in mine]
            entry = (q, partition.assignment, foreign)
            if len(self._cache) >= _CACHE_LIMIT:
                self._cache.clear()
            self._cache[key] = entry
        return entry

    def evaluate(self, chrom: Chromosome) -> float:
        return self._entry(chrom)[0]

    def phenotype(self, chrom: Chromosome) -> Phenotype:
        _, assignment, foreign = self._entry(chrom)
        return assignment, foreign

    def cover(self, chrom: Chromosome) -> Cover:
        return extend_cover(chrom, decode_primary(chrom, self.graph), self.graph, self.k_max)

    def evaluate_batch(self, chroms: Sequence[Chromosome], workers: int = 1) -> np.ndarray:
        if workers > 1:
            missing: dict[tuple[bytes, bytes], Chromosome] = {}
            for chrom in chroms:
                key = chrom.key()
                if key not in self._cache and key not in missing:
                    missing[key] = chrom
            if missing:
                todo = list(missing.values())
                ctx = multiprocessing.get_context("fork")
                with ctx.Pool(
                    workers, initializer=_init_worker, initargs=(self.graph, self.k_max)
                ) as pool:
                    results = pool.map(_worker_eval, todo, chunksize=8)
                for chrom, entry in zip(todo, results):
                    self._cache[chrom.key()] = entry
        return np.array([self.evaluate(c) for c in chroms])


def _stream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic substream for (seed, generation, pair index) and friends."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def initialize(
    g: "Graph", cfg: GAConfig, rng: np.random.Generator, evaluator: Evaluator | None = None
) -> Population:
    """Random population, fully evaluated; deterministic under a fixed rng."""
    cfg.validate()
    if evaluator is None:
        evaluator = Evaluator(g, cfg.k_max)
    individuals = [
        random_chromosome(g, cfg.p_overlap_init, rng, cfg.k_max)
        for _ in range(cfg.population_size)
    ]
    fitness = evaluator.evaluate_batch(individuals)
    best = _best_index(fitness)
    return Population(
        individuals=individuals,
        fitness=fitness,
        generation=0,
        best_chromosome=individuals[best].copy(),
        best_fitness=float(fitness[best]),
    )


def _best_index(fitness: np.ndarray) -> int:
    # ties broken by lower index
    return int(np.argmax(fitness))


def tournament_select(pop: Population, rng: np.random.Generator, size: int) -> int:
    """Index of the fittest of ``size`` uniform draws (with replacement);
    ties go to the lower index."""
    picks = rng.integers(0, len(pop.individuals), size=size)
    best = int(picks[0])
    for p in picks[1:]:
        p = int(p)
        if pop.fitness[p] > pop.fitness[best] or (
            pop.fitness[p] == pop.fitness[best] and p < best
        ):
            best = p
    return best


def crossover(
    a: Chromosome,
    b: Chromosome,
    g: "Graph",
    k_max: int,
    rng: np.random.Generator,
    evaluator: Evaluator | None = None,
) -> tuple[Chromosome, Chromosome]:
    """Uniform node-block crossover: with probability 1/2 per node, the
    children swap that node's adhesion allele together with its overlap bits.
    Both children are repaired (through the evaluator's decode cache when one
    is supplied)."""
    swap = rng.random(g.n) < 0.5
    swap_bits = np.repeat(swap, g.degrees)
    child_a = Chromosome(
        np.where(swap, b.adhesion, a.adhesion),
        np.where(swap_bits, b.overlap_bits, a.overlap_bits),
    )
    child_b = Chromosome(
        np.where(swap, a.adhesion, b.adhesion),
        np.where(swap_bits, a.overlap_bits, b.overlap_bits),
    )
    if evaluator is not None:
        return evaluator.repair(child_a), evaluator.repair(child_b)
    return repair(child_a, g, k_max), repair(child_b, g, k_max)


def _mutate_tracked(
    chrom: Chromosome,
    info: InformativenessTable,
    cfg: GAConfig,
    g: "Graph",
    rng: np.random.Generator,
    evaluator: Evaluator | None = None,
) -> tuple[Chromosome, np.ndarray]:
    """Adaptive mutation; also returns the per-node adhesion-redraw events."""
    n = g.n
    p = cfg.p_min + (cfg.p_max - cfg.p_min) * (1.0 - info.combined)
    degrees = g.degrees
    offsets = g.offsets
    flat = g.flat_adjacency

    redraw = rng.random(n) < p
    adhesion = chrom.adhesion.copy()
    hit = np.nonzero(redraw)[0]
    if len(hit) and len(flat):
        d = degrees[hit]
        picks = (rng.random(len(hit)) * (d + 1)).astype(np.int64)  # pick == d means self
        is_self = picks == d
        idx = np.minimum(offsets[hit] + picks, len(flat) - 1)  # clamp the self picks
        adhesion[hit] = np.where(is_self, hit, flat[idx])

    bits = chrom.overlap_bits.copy()
    coins = rng.random((n, 2))
    fire = coins < p[:, None]
    active = np.nonzero(
        (fire[:, 0] & (degrees >= 1)) | (fire[:, 1] & (degrees >= 2))
    )[0]
    if len(active):
        d = degrees[active]
        pos1 = (rng.random(len(active)) * d).astype(np.int64)
        pos2 = (rng.random(len(active)) * np.maximum(d - 1, 1)).astype(np.int64)
        pos2 = pos2 + (pos2 >= pos1)
        base = offsets[active]
        for idx, i in enumerate(active.tolist()):
            if fire[i, 0]:
                bits[base[idx] + pos1[idx]] ^= 1
            if d[idx] >= 2 and fire[i, 1]:
                bits[base[idx] + pos2[idx]] ^= 1
    raw = Chromosome(adhesion, bits)
    if evaluator is not None:
        return evaluator.repair(raw), redraw
    return repair(raw, g, cfg.k_max), redraw


def adaptive_mutate(
    chrom: Chromosome,
    info: InformativenessTable,
    cfg: GAConfig,
    g: "Graph",
    rng: np.random.Generator,
    evaluator: Evaluator | None = None,
) -> Chromosome:
    """Mutate with per-node probability p_min + (p_max - p_min)(1 - combined).

    A firing node redraws its adhesion allele uniformly from its neighbors
    plus itself and, independently at the same rate, flips each of up to two
    randomly chosen overlap bits. The result is repaired.
    """
    mutated, _ = _mutate_tracked(chrom, info, cfg, g, rng, evaluator)
    return mutated


def reassignment(
    chrom: Chromosome, evaluator: Evaluator, combined: np.ndarray
) -> Chromosome:
    """Greedy hill-climb on the least informative loci.

    Takes the ceil(n/20) nodes with the lowest combined informativeness and,
    for each in turn, moves its primary adhesion to whichever neighbor yields
    the highest fitness, keeping the move only when it strictly improves.
    Fully deterministic; fitness never decreases.
    """
    g = evaluator.graph
    count = math.ceil(g.n / REASSIGN_NODE_DIVISOR)
    targets = np.argsort(combined, kind="stable")[:count]
    current = chrom
    current_q = evaluator.evaluate(chrom)
    for i in targets.tolist():
        if g.degrees[i] == 0:
            continue
        best_q = current_q
        best_variant = None
        for j in g._adj_lists[i]:
            if j == int(current.adhesion[i]):
                continue
            variant = current.copy()
            variant.adhesion[i] = j
            variant = evaluator.repair(variant)
            q = evaluator.evaluate(variant)
            if q > best_q:
                best_q = q
                best_variant = variant
        if best_variant is not None:
            current = best_variant
            current_q = best_q
    return current


def run(
    g: "Graph",
    cfg: GAConfig,
    workers: int = 1,
    on_generation: Callable[[int, InformativenessTable], None] | None = None,
) -> RunReport:
    """Run the full evolutionary loop and return the champion cover.

    Stops after ``cfg.generations`` generations or once the best fitness has
    not improved for ``cfg.stagnation_window`` generations. With a fixed seed
    the report (minus wall time) is bit-reproducible; ``workers`` only
    parallelizes fitness evaluation and never changes results.
    """
    cfg.validate()
    start = time.perf_counter()
    seed = cfg.seed
    if seed is None:
        seed = int.from_bytes(os.urandom(8), "little") >> 1
    effective = replace(cfg, seed=seed)

    evaluator = Evaluator(g, cfg.k_max)
    pop = initialize(g, effective, _stream(seed, 0), evaluator)
    best_chrom = pop.best_chromosome
    best_q = pop.best_fitness
    trace = [best_q]
    stagnant = 0
    generations_run = 0

    for gen in range(1, cfg.generations + 1):
        phens = [evaluator.phenotype(c) for c in pop.individuals]
        info = build_table(
            pop.individuals,
            g,
            best_chrom,
            cfg.k_max,
            membership_weight=cfg.membership_weight,
            phenotypes=phens,
        )
        if on_generation is not None:
            on_generation(pop.generation, info)

        elite_order = sorted(
            range(len(pop.individuals)), key=lambda i: (-pop.fitness[i], i)
        )
        offspring: list[Chromosome] = [
            pop.individuals[i].copy() for i in elite_order[: cfg.elitism_count]
        ]

        pair = 0
        while len(offspring) < cfg.population_size:
            rng = _stream(seed, 1, gen, pair)
            i1 = tournament_select(pop, rng, cfg.tournament_size)
            i2 = tournament_select(pop, rng, cfg.tournament_size)
            if rng.random() < cfg.crossover_rate:
                children = crossover(
                    pop.individuals[i1], pop.individuals[i2], g, cfg.k_max, rng, evaluator
                )
            else:
                children = (pop.individuals[i1].copy(), pop.individuals[i2].copy())
            for child in children:
                if len(offspring) >= cfg.population_size:
                    break
                child = adaptive_mutate(child, info, effective, g, rng, evaluator)
                if rng.random() < REASSIGN_PROBABILITY:
                    child = reassignment(child, evaluator, info.combined)
                offspring.append(child)
            pair += 1

        fitness = evaluator.evaluate_batch(offspring, workers=workers)
        gen_best = _best_index(fitness)
        if fitness[gen_best] > best_q:
            best_q = float(fitness[gen_best])
            best_chrom = offspring[gen_best].copy()
            stagnant = 0
        else:
            stagnant += 1
        pop = Population(
            individuals=offspring,
            fitness=fitness,
            generation=gen,
            best_chromosome=best_chrom,
            best_fitness=best_q,
        )
        trace.append(best_q)
        generations_run = gen
        if stagnant >= cfg.stagnation_window:
            break

    return RunReport(
        best_cover=evaluator.cover(best_chrom),
        best_q=best_q,
        q_trace=trace,
        generations_run=generations_run,
        wall_time_s=time.perf_counter() - start,
        config=effective,
    )
