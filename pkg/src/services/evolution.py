"""
Genetic algorithm engine: k-point crossover, mutation, elitism and
acceptable-fraction termination over a domain plugin.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Sequence, Tuple

import numpy as np

from src.models.errors import ConfigError
from src.models.genetics import GaConfig, GaRunResult, Gene, Member, Population
from src.services.domain import DomainPlugin
from src.utils.seeding import derive_rng

logger = logging.getLogger(__name__)


def k_point_crossover(a: Gene, b: Gene, k: int, rng: np.random.Generator) -> Tuple[Gene, Gene]:
    """
    Combine two parents by swapping alternating segments between k cut points.

    Args:
        a: First parent
        b: Second parent, same length as a
        k: Number of cut points, 1 <= k < len(a)
        rng: Random generator used to draw the cut points

    Returns:
        Two children; child one starts with a's first segment

    Raises:
        ConfigError: On a length mismatch or k out of range
    """
    if len(a) != len(b):
        raise ConfigError(f"parent lengths differ: {len(a)} vs {len(b)}")
    if not 1 <= k < len(a):
        raise ConfigError(f"crossover needs 1 <= k < {len(a)}, got {k}")
    cuts = np.sort(rng.choice(np.arange(1, len(a)), size=k, replace=False))
    return crossover_at(a, b, [int(cut) for cut in cuts])


def crossover_at(a: Gene, b: Gene, cuts: Sequence[int]) -> Tuple[Gene, Gene]:
    """Crossover at explicit sorted cut positions."""
    first, second = [], []
    bounds = [0] + list(cuts) + [len(a)]
    for segment, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        left, right = (a, b) if segment % 2 == 0 else (b, a)
        first.extend(left.units[lo:hi])
        second.extend(right.units[lo:hi])
    return Gene(tuple(first)), Gene(tuple(second))


def mutate(gene: Gene, rate: float, plugin: DomainPlugin, rng: np.random.Generator) -> Gene:
    """
    Pass exactly ceil(rate * len(gene)) distinct positions to the plugin's mutate_unit.

    Args:
        gene: Gene to perturb
        rate: Fraction of units to mutate, in [0, 1]
        plugin: Domain supplying mutate_unit
        rng: Random generator

    Returns:
        The mutated gene (the input gene when rate is 0)
    """
    if not 0.0 <= rate <= 1.0:
        raise ConfigError(f"mutation rate must lie in [0, 1], got {rate}")
    # tolerance keeps 0.07 * 100 from rounding up to 8
    count = min(len(gene), math.ceil(rate * len(gene) - 1e-9))
    if count == 0:
        return gene
    positions = rng.choice(len(gene), size=count, replace=False)
    for position in positions:
        gene = plugin.mutate_unit(gene, int(position), rng)
    return gene


def _evaluate(genes: Sequence[Gene], plugin: DomainPlugin, workers: int) -> List[float]:
    def score(gene: Gene) -> float:
        return plugin.fitness(plugin.gene_decode(gene))

    if workers > 1 and len(genes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(score, genes))
    return [score(gene) for gene in genes]


def _select_parent(child_list: Sequence[Member], rng: np.random.Generator) -> Member:
    """Roulette-wheel selection; uniform when every fitness is zero."""
    weights = np.array([max(member.fitness, 0.0) for member in child_list])
    total = weights.sum()
    if total <= 0:
        return child_list[int(rng.integers(len(child_list)))]
    return child_list[int(rng.choice(len(child_list), p=weights / total))]


def step_generation(pop: Population, cfg: GaConfig, plugin: DomainPlugin,
                    rng: np.random.Generator) -> Population:
    """
    Breed the next generation.

    The top elitism_count members are copied unchanged; every other slot is
    filled by roulette selection over the child list, k-point crossover,
    repair and mutation. Each breeding pair draws its operators from the
    stream (seed, generation, pair) so fitness evaluation may run concurrently
    without changing results.

    Args:
        pop: Evaluated, sorted population
        cfg: GA settings
        plugin: Domain plugin
        rng: Generator for parent selection

    Returns:
        The evaluated next generation, same size as pop
    """
    elites = list(pop.members[:cfg.elitism_count])
    child_list = pop.child_list(cfg.child_list_size)
    slots = len(pop) - len(elites)
    children: List[Gene] = []
    pair = 0
    while len(children) < slots:
        mother = _select_parent(child_list, rng)
        father = _select_parent(child_list, rng)
        pair_rng = derive_rng(cfg.seed, 'breed', pop.generation_index, pair)
        gene_length = len(mother.gene)
        if gene_length >= 2:
            k = min(cfg.crossover_points, gene_length - 1)
            offspring = k_point_crossover(mother.gene, father.gene, k, pair_rng)
        else:
            offspring = (mother.gene, father.gene)
        for child in offspring[:slots - len(children)]:
            child = plugin.repair(child, pair_rng)
            children.append(mutate(child, cfg.mutation_rate, plugin, pair_rng))
        pair += 1
    fitnesses = _evaluate(children, plugin, cfg.workers)
    members = elites + [Member(gene, fitness) for gene, fitness in zip(children, fitnesses)]
    return Population(tuple(members), pop.generation_index + 1)


def _terminated(pop: Population, cfg: GaConfig) -> bool:
    acceptable = pop.acceptable_count(cfg.child_list_size, cfg.fitness_threshold)
    return acceptable / cfg.child_list_size >= cfg.acceptable_fraction


def run_ga(cfg: GaConfig, plugin: DomainPlugin) -> GaRunResult:
    """
    Evolve levels until enough of the child list is acceptable.

    The run stops once the fraction of the top child_list_size members with
    fitness >= fitness_threshold reaches acceptable_fraction, or after
    max_iterations generations.

    Args:
        cfg: GA settings, including the root seed
        plugin: Domain plugin

    Returns:
        GaRunResult with the random initial levels and the acceptable members
        of the final child list; success is False when none were acceptable
    """
    started = time.perf_counter()
    initial_levels = [plugin.random_level(derive_rng(cfg.seed, 'initial', i))
                      for i in range(cfg.population_size)]
    genes = [plugin.gene_encode(level) for level in initial_levels]
    fitnesses = _evaluate(genes, plugin, cfg.workers)
    pop = Population(tuple(Member(g, f) for g, f in zip(genes, fitnesses)), 0)
    history = [pop.best_fitness]
    logger.debug("generation 0: best %.4f", pop.best_fitness)

    terminated_by = 'threshold'
    while not _terminated(pop, cfg):
        if pop.generation_index >= cfg.max_iterations:
            terminated_by = 'max_iterations'
            break
        pop = step_generation(pop, cfg, plugin, derive_rng(cfg.seed, 'select', pop.generation_index))
        history.append(pop.best_fitness)
        logger.debug("generation %d: best %.4f, acceptable %d/%d", pop.generation_index,
                     pop.best_fitness, pop.acceptable_count(cfg.child_list_size, cfg.fitness_threshold),
                     cfg.child_list_size)

    accepted = [m for m in pop.child_list(cfg.child_list_size) if m.fitness >= cfg.fitness_threshold]
    result = GaRunResult(
        initial_levels=initial_levels,
        final_levels=[plugin.gene_decode(m.gene) for m in accepted],
        generations_used=pop.generation_index,
        wall_clock_seconds=time.perf_counter() - started,
        seed=cfg.seed,
        terminated_by=terminated_by,
        final_fitnesses=[m.fitness for m in accepted],
        best_fitness_history=history,
        config=cfg,
        domain=plugin.name
    )
    if result.success:
        logger.info("GA (%s, seed %d) finished after %d generations by %s: %d acceptable levels in %.3fs",
                    plugin.name, cfg.seed, result.generations_used, terminated_by,
                    len(result.final_levels), result.wall_clock_seconds)
    else:
        logger.warning("GA (%s, seed %d) found no acceptable level in %d generations",
                       plugin.name, cfg.seed, result.generations_used)
    return result
