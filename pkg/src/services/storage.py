"""
Reading and writing toolkit artifacts: run directories, level files,
policy datasets with their policy.json, and resolved config files.

A run directory looks like::

    run.json          run summary, GA config and domain parameters
    config.yaml       resolved run configuration
    initial/000.lvl   random starting levels
    final/000.lvl     accepted evolved levels
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import yaml

from src.config.settings import config
from src.models.dataset import PolicyDataset
from src.models.errors import DatasetError, LevelFormatError, StorageError
from src.models.genetics import GaRunResult
from src.models.level import Level, TileAlphabet, read_level_file, write_level_file
from src.models.policy import PolicyConfig
from src.services.domain import DomainPlugin, create_domain

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def level_file_name(index: int) -> str:
    return f"{index:03d}{config['app'].LEVEL_SUFFIX}"


def ensure_dir(path: PathLike) -> Path:
    """
    Create an output directory whose parent must already exist.

    Raises:
        StorageError: If the parent is missing or the directory cannot be made
    """
    path = Path(path)
    try:
        path.mkdir(exist_ok=True)
    except OSError as e:
        raise StorageError(f"cannot create output directory {path}: {e}") from e
    return path


def save_levels(levels: Sequence[Level], directory: PathLike) -> List[Path]:
    """Write levels as 000.lvl, 001.lvl, ... into directory."""
    directory = ensure_dir(directory)
    paths = []
    for index, level in enumerate(levels):
        path = directory / level_file_name(index)
        try:
            write_level_file(path, level)
        except OSError as e:
            raise StorageError(f"cannot write {path}: {e}") from e
        paths.append(path)
    return paths


def load_levels(directory: PathLike, alphabet: TileAlphabet) -> List[Level]:
    """Read every level file in directory in name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise StorageError(f"level directory {directory} does not exist")
    return [read_level_file(path, alphabet)
            for path in sorted(directory.glob(f"*{config['app'].LEVEL_SUFFIX}"))]


def _write_json(path: Path, data: Dict[str, Any]) -> None:
    try:
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise StorageError(f"cannot read {path}: {e}") from e
    if not isinstance(data, dict):
        raise StorageError(f"{path} does not hold a JSON object")
    return data


def save_run(run: GaRunResult, domain: DomainPlugin, out_dir: PathLike) -> Path:
    """
    Persist a GA run.

    Args:
        run: Finished GA run
        domain: Domain the run evolved levels for
        out_dir: Run directory; created if absent, its parent must exist

    Returns:
        Path of the run directory
    """
    out_dir = ensure_dir(out_dir)
    save_levels(run.initial_levels, out_dir / 'initial')
    save_levels(run.final_levels, out_dir / 'final')
    summary = run.to_dict()
    summary['domain_params'] = domain.params()
    _write_json(out_dir / config['app'].RUN_FILE, summary)
    logger.info("Saved run to %s (%d initial, %d final levels)", out_dir,
                len(run.initial_levels), len(run.final_levels))
    return out_dir


def load_run(run_dir: PathLike) -> Tuple[GaRunResult, DomainPlugin]:
    """
    Read a run directory back.

    Raises:
        StorageError: If run.json or the level files are missing or corrupt
    """
    run_dir = Path(run_dir)
    summary = _read_json(run_dir / config['app'].RUN_FILE)
    try:
        domain = create_domain(summary['domain'], summary.get('domain_params'))
        initial = load_levels(run_dir / 'initial', domain.alphabet)
        final = load_levels(run_dir / 'final', domain.alphabet)
        if len(initial) != summary['initial_count'] or len(final) != summary['final_count']:
            raise StorageError(f"{run_dir} holds {len(initial)} initial and {len(final)} final levels, "
                               f"run.json lists {summary['initial_count']} and {summary['final_count']}")
        run = GaRunResult.from_dict(summary, initial, final)
    except (KeyError, TypeError) as e:
        raise StorageError(f"corrupt run summary in {run_dir}: missing {e}") from e
    except LevelFormatError as e:
        raise StorageError(f"corrupt level in {run_dir}: {e}") from e
    for level in initial + final:
        domain.check_level(level)
    return run, domain


def write_dataset(path: PathLike, dataset: PolicyDataset) -> Path:
    path = Path(path)
    try:
        path.write_text(dataset.to_text(), encoding='ascii')
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def read_dataset(path: PathLike) -> PolicyDataset:
    """
    Raises:
        DatasetError: If the file is corrupt
        StorageError: If it cannot be read
    """
    path = Path(path)
    try:
        text = path.read_text(encoding='ascii')
    except UnicodeDecodeError as e:
        raise DatasetError(f"{path} is not an ASCII dataset file") from e
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e
    return PolicyDataset.from_text(text)


def save_policy(dataset: PolicyDataset, policy: PolicyConfig, domain: DomainPlugin,
                out_dir: PathLike) -> Path:
    """
    Write the dataset file and the policy.json that points at it.

    Returns:
        Path of policy.json
    """
    out_dir = ensure_dir(out_dir)
    dataset_name = config['app'].DATASET_FILE
    write_dataset(out_dir / dataset_name, dataset)
    policy_path = out_dir / config['app'].POLICY_FILE
    _write_json(policy_path, {
        'dataset': dataset_name,
        'domain': domain.name,
        'domain_params': domain.params(),
        'policy': policy.to_dict(),
        'pairs': len(dataset),
        'trajectories': dataset.trajectory_count
    })
    return policy_path


def load_policy(policy_path: PathLike) -> Tuple[PolicyDataset, PolicyConfig, DomainPlugin]:
    """
    Load policy.json and the dataset it names.

    Raises:
        StorageError: If policy.json is unreadable or incomplete
        DatasetError: If the dataset does not match the domain
    """
    policy_path = Path(policy_path)
    data = _read_json(policy_path)
    try:
        domain = create_domain(data['domain'], data.get('domain_params'))
        policy = PolicyConfig.from_dict(data['policy'])
        dataset = read_dataset(policy_path.parent / data['dataset'])
    except (KeyError, TypeError) as e:
        raise StorageError(f"corrupt policy file {policy_path}: missing {e}") from e
    if dataset.alphabet != domain.alphabet:
        raise DatasetError(f"dataset alphabet {dataset.alphabet.glyphs!r} does not match the {domain.name} domain")
    return dataset, policy, domain


def write_config(resolved: Dict[str, Any], out_dir: PathLike) -> Path:
    """Write the resolved run configuration as config.yaml."""
    path = Path(out_dir) / config['app'].CONFIG_FILE
    try:
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(resolved, f, sort_keys=True, default_flow_style=False)
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e
    return path


def find_artifacts(root: PathLike) -> Dict[str, List[Path]]:
    """
    Locate artifact directories below root (one level of nesting).

    Returns:
        Mapping with 'runs' (holding run.json), 'levels' (holding level
        files) and 'bench' (holding a summary CSV), each sorted by path
    """
    root = Path(root)
    found: Dict[str, List[Path]] = {'runs': [], 'levels': [], 'bench': []}
    if not root.is_dir():
        return found
    candidates = [root] + sorted(p for p in root.iterdir() if p.is_dir())
    candidates += sorted(p for c in candidates[1:] for p in c.iterdir() if p.is_dir())
    for directory in candidates:
        if (directory / config['app'].RUN_FILE).is_file():
            found['runs'].append(directory)
        elif any(directory.glob(f"*{config['app'].LEVEL_SUFFIX}")) \
                and not (directory.parent / config['app'].RUN_FILE).is_file():
            found['levels'].append(directory)
        if (directory / config['bench'].SUMMARY_FILE).is_file():
            found['bench'].append(directory)
    for key in found:
        found[key].sort()
    return found
