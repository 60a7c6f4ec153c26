"""
Wall-clock benchmark: time to N playable levels by repeated GA runs versus
one GA run distilled into a policy that is then queried N times.
"""

import csv
import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, TypeVar, Union

import numpy as np

from src.config.settings import config
from src.models.bench import (BenchCell, BenchPlan, BenchRecord, BenchSummary, RESULT_COLUMNS,
                              SUMMARY_COLUMNS)
from src.models.dataset import PolicyDataset
from src.models.errors import BenchError, GenerationFailedError, StorageError
from src.models.genetics import GaRunResult
from src.models.level import Level, format_level
from src.services.distillation import build_dataset
from src.services.domain import DomainPlugin, create_domain
from src.services.evolution import run_ga
from src.services.policy_service import NeighbourIndex, generate_level
from src.utils.seeding import derive_rng, derive_seed

logger = logging.getLogger(__name__)

T = TypeVar('T')


def _timed(fn: Callable[[], T]) -> Tuple[T, float]:
    started = time.perf_counter()
    value = fn()
    return value, time.perf_counter() - started


def levels_digest(levels: Sequence[Level]) -> str:
    """sha256 over the text form of levels, in order."""
    digest = hashlib.sha256()
    for level in levels:
        digest.update(format_level(level).encode('ascii'))
    return digest.hexdigest()


def cell_domain(plan: BenchPlan, cell: BenchCell) -> DomainPlugin:
    params = dict(plan.domain_params)
    params['size' if cell.domain == 'maze' else 'width'] = cell.size
    return create_domain(cell.domain, params)


def _ga_seed(seed: int, run: int) -> int:
    """Seed of the run-th GA execution for a bench seed; run 0 uses the seed itself."""
    return seed if run == 0 else derive_seed(seed, 'ga-run', run)


def _successful_ga(domain: DomainPlugin, plan: BenchPlan, cell: BenchCell, seed: int,
                   first_run: int = 0) -> Tuple[GaRunResult, int]:
    """
    Run the GA until a run yields acceptable levels, retrying with derived seeds.

    Returns:
        (run result, index of the next unused run)
    """
    run_index = first_run
    for _ in range(config['bench'].MAX_GA_RETRIES):
        cfg = domain.ga_config(acceptable_fraction=cell.fraction, seed=_ga_seed(seed, run_index),
                               **plan.ga_overrides)
        result = run_ga(cfg, domain)
        run_index += 1
        if result.success:
            return result, run_index
        logger.info("GA run %d for %s failed; retrying with the next derived seed", run_index - 1, cell)
    raise BenchError(f"{config['bench'].MAX_GA_RETRIES} consecutive GA runs failed for {cell} seed {seed}")


def _revalidate(domain: DomainPlugin, levels: Sequence[Level], method: str, cell: BenchCell) -> None:
    for index, level in enumerate(levels):
        if not domain.is_acceptable(level):
            raise BenchError(f"{method} level {index} for {cell} fails re-validation "
                             f"(fitness {domain.fitness(level):.4f})")


def bench_ga(plan: BenchPlan, cell: BenchCell, seed: int) -> Tuple[BenchRecord, List[Level]]:
    """
    Time repeated GA runs until cell.n_levels acceptable levels are collected.

    Failed runs are retried with the next derived seed and their time counts.

    Returns:
        The timing record and the first n_levels levels collected
    """
    domain = cell_domain(plan, cell)
    levels: List[Level] = []
    runs = 0

    def collect() -> None:
        nonlocal runs
        while len(levels) < cell.n_levels:
            result, runs = _successful_ga(domain, plan, cell, seed, runs)
            levels.extend(result.final_levels)

    _, elapsed = _timed(collect)
    levels = levels[:cell.n_levels]
    _revalidate(domain, levels, 'ga', cell)
    record = BenchRecord(method='ga', domain=cell.domain, size=cell.size, fraction=cell.fraction,
                         n_levels=cell.n_levels, seed=seed, elapsed_seconds=elapsed, ga_seconds=elapsed,
                         levels_sha256=levels_digest(levels))
    return record, levels


def bench_policy(plan: BenchPlan, cell: BenchCell, seed: int) -> Tuple[BenchRecord, List[Level]]:
    """
    Time one GA run, its distillation and policy generation of cell.n_levels levels.

    Generation stops early once failures outnumber the levels required, which
    already puts the failure rate above one half.

    Returns:
        The timing record and the generated levels
    """
    domain = cell_domain(plan, cell)
    (run, _), ga_seconds = _timed(lambda: _successful_ga(domain, plan, cell, seed))

    def distill() -> Tuple[PolicyDataset, NeighbourIndex]:
        dataset = build_dataset(run)
        return dataset, NeighbourIndex(dataset, metric=policy_cfg.metric)

    policy_cfg = domain.policy_config(**plan.policy_overrides)
    (dataset, index), distill_seconds = _timed(distill)

    levels: List[Level] = []
    failures = 0

    def generate() -> None:
        nonlocal failures
        attempt = 0
        while len(levels) < cell.n_levels and failures <= cell.n_levels:
            try:
                result = generate_level(index, dataset, domain, policy_cfg, derive_rng(seed, 'generate', attempt))
                levels.append(result.level)
            except GenerationFailedError:
                failures += 1
            attempt += 1

    _, generate_seconds = _timed(generate)
    _revalidate(domain, levels, 'policy', cell)
    if not plan.include_distillation_cost:
        logger.info("Policy cell %s seed %d: leaving out %.3fs of GA and %.3fs of distillation",
                    cell, seed, ga_seconds, distill_seconds)
        ga_seconds = distill_seconds = 0.0
    elapsed = ga_seconds + distill_seconds + generate_seconds
    record = BenchRecord(method='policy', domain=cell.domain, size=cell.size, fraction=cell.fraction,
                         n_levels=cell.n_levels, seed=seed, elapsed_seconds=elapsed, ga_seconds=ga_seconds,
                         distill_seconds=distill_seconds, generate_seconds=generate_seconds,
                         failures=failures, successes=len(levels), levels_sha256=levels_digest(levels))
    return record, levels


_BENCHES = {'ga': bench_ga, 'policy': bench_policy}


def summarize(records: Sequence[BenchRecord]) -> List[BenchSummary]:
    """Per (method, cell) mean and sample standard deviation over seeds, in first-seen order."""
    groups: Dict[Tuple[str, BenchCell], List[BenchRecord]] = {}
    for record in records:
        groups.setdefault((record.method, record.cell), []).append(record)
    summaries = []
    for (method, cell), group in groups.items():
        elapsed = [r.elapsed_seconds for r in group]
        failures = sum(r.failures for r in group)
        attempts = failures + sum(r.successes for r in group)
        failure_rate = failures / attempts if attempts else 0.0
        summaries.append(BenchSummary(
            method=method,
            domain=cell.domain,
            size=cell.size,
            fraction=cell.fraction,
            n_levels=cell.n_levels,
            seeds=len(group),
            mean_seconds=float(np.mean(elapsed)),
            std_seconds=float(np.std(elapsed, ddof=1)) if len(elapsed) > 1 else 0.0,
            mean_ga_seconds=float(np.mean([r.ga_seconds for r in group])),
            mean_distill_seconds=float(np.mean([r.distill_seconds for r in group])),
            mean_generate_seconds=float(np.mean([r.generate_seconds for r in group])),
            failure_rate=failure_rate,
            degraded=failure_rate > config['bench'].DEGRADED_FAILURE_RATE
        ))
    return summaries


def write_summary(summaries: Sequence[BenchSummary], path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for summary in summaries:
                writer.writerow(summary.to_row())
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def read_summary(path: Union[str, Path]) -> List[BenchSummary]:
    """Read a summary CSV written by write_summary."""
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            return [BenchSummary.from_row(row) for row in csv.DictReader(f)]
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e


def run_plan(plan: BenchPlan, out_dir: Union[str, Path],
             workers: int = 1) -> Tuple[List[BenchRecord], List[BenchSummary]]:
    """
    Run every (method, cell, seed) of a plan and write results.csv and summary.csv.

    Rows are flushed to results.csv as they finish, so an abort leaves the
    completed part on disk. With plan.parallel jobs share a thread pool and
    rows are marked contended.

    Args:
        plan: Benchmark sweep
        out_dir: Existing directory for the CSV files
        workers: Pool size in parallel mode

    Returns:
        (records in plan order, per-cell summaries)
    """
    out_dir = Path(out_dir)
    jobs = [(method, cell, seed) for cell in plan.cells() for method in plan.methods for seed in plan.seeds]
    results_path = out_dir / config['bench'].RESULTS_FILE
    records: List[BenchRecord] = []

    def run_job(job: Tuple[str, BenchCell, int]) -> BenchRecord:
        method, cell, seed = job
        record, _ = _BENCHES[method](plan, cell, seed)
        record.contended = plan.parallel
        logger.info("%s %s seed %d: %.3fs", method, cell, seed, record.elapsed_seconds)
        return record

    try:
        with open(results_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=RESULT_COLUMNS, lineterminator="\n")
            writer.writeheader()
            if plan.parallel and workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    finished = pool.map(run_job, jobs)
                    for record in finished:
                        records.append(record)
                        writer.writerow(record.to_row())
                        f.flush()
            else:
                for job in jobs:
                    record = run_job(job)
                    records.append(record)
                    writer.writerow(record.to_row())
                    f.flush()
    except OSError as e:
        raise StorageError(f"cannot write {results_path}: {e}") from e

    summaries = summarize(records)
    write_summary(summaries, out_dir / config['bench'].SUMMARY_FILE)
    degraded = [s for s in summaries if s.degraded]
    if degraded:
        logger.warning("%d bench cells degraded (policy failure rate above %.0f%%)",
                       len(degraded), config['bench'].DEGRADED_FAILURE_RATE * 100)
    return records, summaries


def plot_results(summaries: Sequence[BenchSummary], out_dir: Union[str, Path]) -> List[Path]:
    """
    Render elapsed-vs-N and elapsed-vs-size curves (mean with std error bars) as SVG.

    Returns:
        Paths of the written plots
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    written = []
    axes_spec = [('n_levels', 'Levels required', 'elapsed_vs_levels.svg'),
                 ('size', 'Level size', 'elapsed_vs_size.svg')]
    for x_attr, x_label, file_name in axes_spec:
        series: Dict[str, List[BenchSummary]] = {}
        for summary in summaries:
            fixed = summary.size if x_attr == 'n_levels' else summary.n_levels
            label = f"{summary.method} f={summary.fraction:g} " + \
                    (f"size={fixed}" if x_attr == 'n_levels' else f"N={fixed}")
            series.setdefault(label, []).append(summary)

        fig, ax = plt.subplots(figsize=(7, 4.5), constrained_layout=True)
        for label, points in sorted(series.items()):
            points.sort(key=lambda s: getattr(s, x_attr))
            ax.errorbar([getattr(s, x_attr) for s in points], [s.mean_seconds for s in points],
                        yerr=[s.std_seconds for s in points], marker='o', capsize=3, label=label)
        ax.set_xlabel(x_label)
        ax.set_ylabel("Wall-clock time (s)")
        ax.grid(True, alpha=0.3)
        if series:
            ax.legend(loc="best", fontsize=7)
        path = out_dir / file_name
        try:
            fig.savefig(path, format='svg')
        except OSError as e:
            raise StorageError(f"cannot write {path}: {e}") from e
        finally:
            plt.close(fig)
        written.append(path)
    return written
