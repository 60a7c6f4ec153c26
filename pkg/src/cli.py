"""
Command-line entry point: ``python -m src.cli <command> [options]``.

Commands:
    evolve      run the GA and save a run directory
    distill     turn a run directory into a policy dataset and policy.json
    generate    query a policy for new acceptable levels
    render      print a level file
    validate    print fitness breakdowns and check the threshold
    bench       time GA against policy generation over a sweep
    plot        redraw benchmark curves from a summary CSV

Exit codes: 0 success, 1 method failure, 2 usage, config or I/O failure.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, Optional

from src.config.settings import config
from src.models.errors import (BenchError, EvolutionError, GenerationFailedError, LevelFormatError,
                               PcgError, StorageError)
from src.models.level import Level, parse_level, write_level_file
from src.models.policy import PolicyConfig
from src.models.run_config import RunConfig
from src.services.bench_service import plot_results, read_summary, run_plan
from src.services.distillation import build_dataset, replay_trajectory
from src.services.domain import DOMAIN_NAMES, DomainPlugin, create_domain, domain_for_text
from src.services.evolution import run_ga
from src.services.maze_domain import shortest_path
from src.services.policy_service import NeighbourIndex, generate_level, novelty_report
from src.services.storage import (ensure_dir, level_file_name, load_policy, load_run, save_policy, save_run,
                                  write_config)
from src.utils.logging_config import setup_logging
from src.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

METHOD_FAILURES = (EvolutionError, GenerationFailedError, BenchError)

# flag name -> argparse keyword arguments; values stay strings and are parsed by RunConfig
SHARED_FLAGS: Dict[str, dict] = {
    'seed': dict(help="root seed for every random stream"),
    'out': dict(help="output directory"),
    'domain': dict(choices=DOMAIN_NAMES, help="level domain"),
    'size': dict(help="maze size D, or platformer width (comma list for bench)"),
    'fraction': dict(help="GA acceptable fraction of the child list (comma list for bench)"),
    'p': dict(help="extended-action proportion"),
    'threshold': dict(help="fitness threshold"),
    'levels': dict(help="number of levels (comma list for bench)"),
    'max-steps': dict(help="policy queries per attempt"),
    'max-restarts': dict(help="policy restarts before giving up"),
    'include-distill-cost': dict(choices=('on', 'off'), help="count GA and distillation time in policy rows"),
    'metric': dict(choices=('hamming', 'euclidean'), help="nearest-neighbour metric"),
    'extension-mode': dict(choices=('proportion', 'printed'), help="extended-action length rule"),
    'fitness-guard': dict(choices=('on', 'off'), help="undo policy runs that lower fitness"),
    'max-retries': dict(help="rejected runs tried per policy query before moving on"),
    'follow-end-level': dict(choices=('on', 'off'), help="keep an attempt on trajectories sharing its first end level"),
    'log-level': dict(help="DEBUG, INFO, WARNING or ERROR"),
    'workers': dict(help="threads for fitness evaluation and parallel bench"),
}


def _default_out(name: str) -> Path:
    root = Path(config['app'].OUTPUT_DIR)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise StorageError(f"cannot create output root {root}: {e}") from e
    return root / name


def _out_dir(cfg: RunConfig, name: str) -> Path:
    return ensure_dir(cfg.out) if cfg.out else ensure_dir(_default_out(name))


def _read_text(path: str) -> str:
    try:
        with open(path, 'r', encoding='ascii') as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise LevelFormatError(f"cannot read level file {path}: {e}") from e


def _level_domain(cfg: RunConfig, text: str) -> str:
    return cfg.domain or domain_for_text(text)


def _domain_for_level(cfg: RunConfig, name: str, level: Level) -> DomainPlugin:
    """Domain plugin sized to an existing level."""
    params = RunConfig(domain=name, balanced_ratios=cfg.balanced_ratios, air_bias=cfg.air_bias).domain_params()
    if name == 'platformer':
        params.update(width=level.width, height=level.height)
    elif level.width == level.height:
        params['size'] = level.width
    return create_domain(name, params)


def cmd_evolve(args: argparse.Namespace, cfg: RunConfig) -> int:
    domain = cfg.create_domain()
    ga = cfg.ga_config(domain)
    out = _out_dir(cfg, 'run')
    result = run_ga(ga, domain)
    save_run(result, domain, out)
    write_config(cfg.resolved(domain).to_dict(), out)
    print(f"generations: {result.generations_used}")
    print(f"acceptable: {len(result.final_levels)}/{ga.child_list_size}")
    print(f"wall_clock: {result.wall_clock_seconds:.3f}s")
    print(f"run: {out}")
    if not result.success:
        raise EvolutionError(f"no acceptable level after {result.generations_used} generations")
    return 0


def cmd_distill(args: argparse.Namespace, cfg: RunConfig) -> int:
    run, domain = load_run(args.run_dir)
    if not run.final_levels:
        print(f"error: run {args.run_dir} has no final levels to distill", file=sys.stderr)
        return 1
    dataset = build_dataset(run, workers=cfg.ga_overrides()['workers'])
    cfg = replace(cfg, domain=domain.name)
    policy = cfg.policy_config(domain)
    out = _out_dir(cfg, 'policy') if cfg.out else ensure_dir(Path(args.run_dir) / 'policy')
    policy_path = save_policy(dataset, policy, domain, out)
    write_config(cfg.resolved(domain).to_dict(), out)
    print(f"trajectories: {dataset.trajectory_count}")
    print(f"pairs: {len(dataset)}")
    print(f"delta_total: {sum(dataset.delta_lengths)}")
    print(f"policy: {policy_path}")
    return 0


def cmd_generate(args: argparse.Namespace, cfg: RunConfig) -> int:
    count = cfg.single('levels')
    count = 1 if count is None else count
    if count == 0:
        print("nothing to generate")
        return 0
    dataset, stored, domain = load_policy(args.policy)
    policy = PolicyConfig.from_dict({**stored.to_dict(), **cfg.policy_overrides()})
    index = NeighbourIndex(dataset, metric=policy.metric)
    seed = cfg.seed if cfg.seed is not None else config['evolution'].DEFAULT_SEED
    out = _out_dir(cfg, 'generated')

    generated, failed = [], 0
    for i in range(count):
        try:
            result = generate_level(index, dataset, domain, policy, derive_rng(seed, 'generate', i))
        except GenerationFailedError as e:
            failed += 1
            print(f"level {i:03d}: failed after {e.attempts} attempts, best fitness {e.best_fitness:.4f}")
            continue
        try:
            write_level_file(out / level_file_name(i), result.level)
        except OSError as e:
            raise StorageError(f"cannot write level {i}: {e}") from e
        generated.append(result.level)
        print(f"level {i:03d}: {result.wall_clock_seconds:.3f}s, {result.attempts} attempts, "
              f"{result.policy_queries} queries, fitness {result.fitness:.4f}")

    finals = [level for level in (replay_trajectory(dataset, t) for t in range(dataset.trajectory_count))
              if level is not None]
    report = novelty_report(generated, finals)
    if generated:
        print(f"identical_to_training: {report.identical_fraction:.2f}")
    write_config(replace(cfg, domain=domain.name).merged(RunConfig(
        p=policy.p, max_steps=policy.max_steps, max_restarts=policy.max_restarts, threshold=policy.fitness_threshold,
        metric=policy.metric, extension_mode=policy.extension_mode, fitness_guard=policy.fitness_guard,
        max_retries=policy.max_retries, follow_end_level=policy.follow_end_level, seed=seed, levels=[count])).to_dict(), out)
    if failed:
        print(f"error: {failed} of {count} levels exhausted their restarts", file=sys.stderr)
        return 1
    return 0


def cmd_render(args: argparse.Namespace, cfg: RunConfig) -> int:
    text = _read_text(args.level_file)
    name = _level_domain(cfg, text)
    level = parse_level(text, create_domain(name).alphabet)
    domain = _domain_for_level(cfg, name, level)
    sys.stdout.write(domain.render(level, show_path=args.path))
    if args.path and name == 'maze' and shortest_path(level) is None:
        print("unsolvable: no path from the top-left to the bottom-right cell")
    return 0


def cmd_validate(args: argparse.Namespace, cfg: RunConfig) -> int:
    below = 0
    for path in args.level_files:
        text = _read_text(path)
        name = _level_domain(cfg, text)
        level = parse_level(text, create_domain(name).alphabet)
        domain = _domain_for_level(cfg, name, level)
        threshold = cfg.threshold if cfg.threshold is not None else domain.fitness_threshold
        breakdown = domain.evaluate(level)
        ok = breakdown.total >= threshold
        below += not ok
        details = ", ".join(f"{key}={value:.4f}" if isinstance(value, float) else f"{key}={value}"
                            for key, value in breakdown.to_dict().items())
        print(f"{path}: {'ok' if ok else 'BELOW THRESHOLD'} ({details})")
    return 1 if below else 0


def cmd_bench(args: argparse.Namespace, cfg: RunConfig) -> int:
    plan = cfg.bench_plan()
    out = _out_dir(cfg, 'bench')
    write_config(cfg.resolved(bench=True).to_dict(), out)
    _, summaries = run_plan(plan, out, workers=cfg.ga_overrides()['workers'])
    plot_results(summaries, out)
    for s in summaries:
        flag = " DEGRADED" if s.degraded else ""
        print(f"{s.method:6s} size={s.size} fraction={s.fraction:g} N={s.n_levels}: "
              f"{s.mean_seconds:.3f}s +/- {s.std_seconds:.3f}s{flag}")
    print(f"results: {out}")
    return 1 if any(s.degraded for s in summaries) else 0


def cmd_plot(args: argparse.Namespace, cfg: RunConfig) -> int:
    summaries = read_summary(args.summary_csv)
    out = ensure_dir(cfg.out) if cfg.out else Path(args.summary_csv).parent
    for path in plot_results(summaries, out):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--config', default=argparse.SUPPRESS, help="flat YAML file of settings")
    for flag, kwargs in SHARED_FLAGS.items():
        shared.add_argument(f'--{flag}', default=argparse.SUPPRESS, **kwargs)

    parser = argparse.ArgumentParser(prog='pcg', description="Tile-level generation by GA and policy distillation")
    commands = parser.add_subparsers(dest='command', required=True)

    def add(name: str, handler: Callable[[argparse.Namespace, RunConfig], int], help_text: str):
        sub = commands.add_parser(name, parents=[shared], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    add('evolve', cmd_evolve, "run the GA and save a run directory")
    add('distill', cmd_distill, "build the policy dataset from a run").add_argument('run_dir')
    add('generate', cmd_generate, "generate levels with a policy").add_argument('policy', help="policy.json")
    render = add('render', cmd_render, "print a level")
    render.add_argument('level_file')
    render.add_argument('--path', action='store_true', help="overlay the maze shortest path")
    add('validate', cmd_validate, "check levels against the fitness threshold").add_argument('level_files', nargs='+')
    add('bench', cmd_bench, "time GA against policy generation").add_argument(
        'plan', nargs='?', help="bench plan (a config file)")
    add('plot', cmd_plot, "draw benchmark curves").add_argument('summary_csv')
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Config file values, then the bench plan file, then command-line flags."""
    cfg = RunConfig()
    for path in (getattr(args, 'config', None), getattr(args, 'plan', None)):
        if path:
            cfg = cfg.merged(RunConfig.from_file(path))
    flags = {flag: getattr(args, flag.replace('-', '_')) for flag in SHARED_FLAGS
             if hasattr(args, flag.replace('-', '_'))}
    return cfg.merged(RunConfig.from_mapping(flags, source='command line'))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_run_config(args)
        setup_logging(cfg.log_level)
        return args.handler(args, cfg)
    except METHOD_FAILURES as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return 1
    except PcgError as e:
        logger.error("%s aborted: %s", args.command, e)
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
