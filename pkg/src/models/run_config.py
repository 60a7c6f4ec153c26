"""
Run configuration shared by every CLI command.

A config file is a flat YAML mapping whose keys mirror the command-line
flags (``max-steps`` and ``max_steps`` are the same key). Flags override
file values, which override the domain defaults.
"""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import yaml

from src.config.settings import config
from src.models.bench import BenchPlan
from src.models.errors import ConfigError
from src.models.genetics import GaConfig
from src.models.policy import PolicyConfig

_TRUE = {'on', 'true', 'yes', '1'}
_FALSE = {'off', 'false', 'no', '0'}


def _int(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)


def _str(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError(f"expected a string, got {value!r}")
    return value


def _bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"expected on/off, got {value!r}")


def _list_of(item: Callable[[Any], Any]) -> Callable[[Any], List[Any]]:
    def parse(value: Any) -> List[Any]:
        if isinstance(value, str):
            value = [part for part in value.split(',') if part.strip()]
        elif not isinstance(value, (list, tuple)):
            value = [value]
        return [item(part.strip() if isinstance(part, str) else part) for part in value]
    return parse


def _opt(parse: Callable[[Any], Any]) -> Any:
    return field(default=None, metadata={'parse': parse})


@dataclass(frozen=True)
class RunConfig:
    """Every setting a command can take; None means 'use the default'."""
    domain: Optional[str] = _opt(_str)
    seed: Optional[int] = _opt(_int)
    out: Optional[str] = _opt(_str)
    size: Optional[List[int]] = _opt(_list_of(_int))
    fraction: Optional[List[float]] = _opt(_list_of(_float))
    levels: Optional[List[int]] = _opt(_list_of(_int))
    seeds: Optional[List[int]] = _opt(_list_of(_int))
    methods: Optional[List[str]] = _opt(_list_of(_str))
    p: Optional[float] = _opt(_float)
    threshold: Optional[float] = _opt(_float)
    max_steps: Optional[int] = _opt(_int)
    max_restarts: Optional[int] = _opt(_int)
    metric: Optional[str] = _opt(_str)
    extension_mode: Optional[str] = _opt(_str)
    fitness_guard: Optional[bool] = _opt(_bool)
    max_retries: Optional[int] = _opt(_int)
    follow_end_level: Optional[bool] = _opt(_bool)
    include_distill_cost: Optional[bool] = _opt(_bool)
    parallel: Optional[bool] = _opt(_bool)
    population_size: Optional[int] = _opt(_int)
    child_list_size: Optional[int] = _opt(_int)
    crossover_points: Optional[int] = _opt(_int)
    mutation_rate: Optional[float] = _opt(_float)
    max_iterations: Optional[int] = _opt(_int)
    elitism_count: Optional[int] = _opt(_int)
    air_bias: Optional[float] = _opt(_float)
    balanced_ratios: Optional[bool] = _opt(_bool)
    workers: Optional[int] = _opt(_int)
    log_level: Optional[str] = _opt(_str)

    @classmethod
    def from_mapping(cls, data: Dict[str, Any], source: str = 'config') -> 'RunConfig':
        """
        Build a RunConfig from raw values, normalising '-' to '_' in keys.

        Raises:
            ConfigError: On unknown keys or values of the wrong type
        """
        parsers = {f.name: f.metadata['parse'] for f in fields(cls)}
        values = {}
        for raw_key, value in data.items():
            key = str(raw_key).replace('-', '_')
            if key not in parsers:
                raise ConfigError(f"{source}: unknown key {raw_key!r}")
            if value is None:
                continue
            try:
                values[key] = parsers[key](value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{source}: bad value for {raw_key!r}: {e}") from e
        return cls(**values)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'RunConfig':
        """
        Load a flat YAML config file.

        Raises:
            ConfigError: If the file is unreadable, not a mapping or has unknown keys
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot load config {path}: {e}") from e
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a flat mapping of settings")
        return cls.from_mapping(data, source=str(path))

    def merged(self, overrides: 'RunConfig') -> 'RunConfig':
        """Copy of self with every non-None value of overrides applied."""
        changes = {f.name: getattr(overrides, f.name) for f in fields(self)
                   if getattr(overrides, f.name) is not None}
        return replace(self, **changes)

    def single(self, name: str) -> Optional[Any]:
        """The one value of a list-valued setting, or None when unset."""
        values = getattr(self, name)
        if values is None:
            return None
        if len(values) != 1:
            raise ConfigError(f"{name} takes a single value here, got {len(values)}")
        return values[0]

    @property
    def domain_name(self) -> str:
        return self.domain or 'maze'

    def domain_params(self, with_size: bool = True) -> Dict[str, Any]:
        """Constructor arguments for the selected domain."""
        params: Dict[str, Any] = {}
        if self.domain_name == 'maze':
            if with_size and self.size is not None:
                params['size'] = self.single('size')
            if self.balanced_ratios is not None:
                params['balanced_ratios'] = self.balanced_ratios
        else:
            if with_size and self.size is not None:
                params['width'] = self.single('size')
            if self.air_bias is not None:
                params['air_bias'] = self.air_bias
        return params

    def create_domain(self):
        """Instantiate the selected domain plugin."""
        from src.services.domain import create_domain

        return create_domain(self.domain_name, self.domain_params())

    def ga_overrides(self) -> Dict[str, Any]:
        """GA settings that apply to every run, i.e. all but the seed and acceptable fraction."""
        return {key: value for key, value in {
            'population_size': self.population_size,
            'child_list_size': self.child_list_size,
            'crossover_points': self.crossover_points,
            'mutation_rate': self.mutation_rate,
            'max_iterations': self.max_iterations,
            'elitism_count': self.elitism_count,
            'fitness_threshold': self.threshold,
            'workers': self.workers if self.workers is not None else config['app'].WORKERS,
        }.items() if value is not None}

    def policy_overrides(self) -> Dict[str, Any]:
        return {key: value for key, value in {
            'p': self.p,
            'fitness_threshold': self.threshold,
            'max_steps': self.max_steps,
            'max_restarts': self.max_restarts,
            'metric': self.metric,
            'extension_mode': self.extension_mode,
            'fitness_guard': self.fitness_guard,
            'max_retries': self.max_retries,
            'follow_end_level': self.follow_end_level,
        }.items() if value is not None}

    def ga_config(self, domain) -> GaConfig:
        seed = self.seed if self.seed is not None else config['evolution'].DEFAULT_SEED
        return domain.ga_config(acceptable_fraction=self.single('fraction'), seed=seed, **self.ga_overrides())

    def policy_config(self, domain) -> PolicyConfig:
        return domain.policy_config(**self.policy_overrides())

    def bench_plan(self) -> BenchPlan:
        """Benchmark sweep described by this config; unset axes take the bench defaults."""
        values: Dict[str, Any] = dict(
            domain=self.domain_name,
            ga_overrides=self.ga_overrides(),
            policy_overrides=self.policy_overrides(),
            domain_params=self.domain_params(with_size=False),
        )
        if self.domain_name == 'platformer' and self.size is not None:
            values['domain_params']['width'] = self.single('size')
        elif self.size is not None:
            values['maze_sizes'] = tuple(self.size)
        optional = {'acceptable_fractions': self.fraction, 'levels_required': self.levels,
                    'seeds': self.seeds, 'methods': self.methods,
                    'include_distillation_cost': self.include_distill_cost, 'parallel': self.parallel}
        values.update({key: value for key, value in optional.items() if value is not None})
        return BenchPlan(**values)

    def resolved(self, domain=None, bench: bool = False) -> 'RunConfig':
        """
        Copy with the domain defaults filled in, as written to config.yaml.

        Args:
            domain: Domain plugin to take defaults from; created when omitted
            bench: Fill the sweep axes from the bench plan instead of single values
        """
        if bench:
            plan = self.bench_plan()
            defaults = RunConfig(
                domain=plan.domain,
                size=list(plan.sizes),
                fraction=list(plan.acceptable_fractions),
                levels=list(plan.levels_required),
                seeds=list(plan.seeds),
                methods=list(plan.methods),
                include_distill_cost=plan.include_distillation_cost,
                parallel=plan.parallel,
            )
            sample = self.merged(RunConfig(size=[plan.sizes[0]], fraction=[plan.acceptable_fractions[0]]))
            domain = sample.create_domain()
            ga, policy = sample.ga_config(domain), sample.policy_config(domain)
        else:
            domain = domain or self.create_domain()
            ga, policy = self.ga_config(domain), self.policy_config(domain)
            params = domain.params()
            defaults = RunConfig(
                domain=domain.name,
                seed=ga.seed,
                size=[params['size'] if domain.name == 'maze' else params['width']],
                fraction=[ga.acceptable_fraction],
            )
        params = domain.params()
        defaults = replace(
            defaults,
            population_size=ga.population_size,
            child_list_size=ga.child_list_size,
            crossover_points=ga.crossover_points,
            mutation_rate=ga.mutation_rate,
            max_iterations=ga.max_iterations,
            elitism_count=ga.elitism_count,
            threshold=ga.fitness_threshold,
            workers=ga.workers,
            p=policy.p,
            max_steps=policy.max_steps,
            max_restarts=policy.max_restarts,
            metric=policy.metric,
            extension_mode=policy.extension_mode,
            fitness_guard=policy.fitness_guard,
            max_retries=policy.max_retries,
            follow_end_level=policy.follow_end_level,
            balanced_ratios=params.get('balanced_ratios'),
            air_bias=params.get('air_bias'),
        )
        return defaults.merged(self)

    def to_dict(self) -> Dict[str, Any]:
        """Non-empty settings with list values as plain lists."""
        data = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                data[f.name] = list(value) if isinstance(value, (list, tuple)) else value
        return data
