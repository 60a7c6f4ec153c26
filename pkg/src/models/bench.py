"""
Data models for the wall-clock benchmark.
"""

import itertools
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

from src.config.settings import config
from src.models.errors import ConfigError

METHODS = ('ga', 'policy')

RESULT_COLUMNS = ['method', 'domain', 'size', 'fraction', 'n_levels', 'seed', 'elapsed_s',
                  'ga_s', 'distill_s', 'generate_s', 'contended', 'failures', 'levels_sha256']
SUMMARY_COLUMNS = ['method', 'domain', 'size', 'fraction', 'n_levels', 'seeds', 'mean_s', 'std_s',
                   'mean_ga_s', 'mean_distill_s', 'mean_generate_s', 'failure_rate', 'degraded']


def _default_levels(domain: str) -> Tuple[int, ...]:
    if domain == 'platformer':
        return config['bench'].PLATFORMER_LEVELS_REQUIRED
    return config['bench'].MAZE_LEVELS_REQUIRED


@dataclass(frozen=True)
class BenchCell:
    """One swept combination, run once per seed."""
    domain: str
    size: int
    fraction: float
    n_levels: int


@dataclass(frozen=True)
class BenchPlan:
    """
    A benchmark sweep.

    Every cell of maze_sizes x acceptable_fractions x levels_required runs
    once per seed and method. For the platformer the size axis is the level
    width.
    """
    domain: str = 'maze'
    maze_sizes: Tuple[int, ...] = config['bench'].MAZE_SIZES
    acceptable_fractions: Tuple[float, ...] = config['bench'].ACCEPTABLE_FRACTIONS
    levels_required: Optional[Tuple[int, ...]] = None
    seeds: Tuple[int, ...] = tuple(config['bench'].SEEDS)
    include_distillation_cost: bool = True
    methods: Tuple[str, ...] = METHODS
    parallel: bool = False
    ga_overrides: Dict[str, Any] = field(default_factory=dict)
    policy_overrides: Dict[str, Any] = field(default_factory=dict)
    domain_params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.levels_required is None:
            object.__setattr__(self, 'levels_required', _default_levels(self.domain))
        for name in ('maze_sizes', 'acceptable_fractions', 'levels_required', 'seeds', 'methods'):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigError(f"bench plan needs at least one value for {name}")
            object.__setattr__(self, name, values)
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown bench methods: {', '.join(sorted(unknown))}")
        if any(n < 1 for n in self.levels_required):
            raise ConfigError("levels_required values must be positive")

    @property
    def sizes(self) -> Tuple[int, ...]:
        if self.domain == 'platformer':
            return (self.domain_params.get('width', config['platformer'].WIDTH),)
        return self.maze_sizes

    def cells(self) -> List[BenchCell]:
        return [BenchCell(self.domain, size, fraction, n_levels)
                for size, fraction, n_levels
                in itertools.product(self.sizes, self.acceptable_fractions, self.levels_required)]

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data


@dataclass
class BenchRecord:
    """Timing of one method on one cell and seed."""
    method: str
    domain: str
    size: int
    fraction: float
    n_levels: int
    seed: int
    elapsed_seconds: float
    ga_seconds: float = 0.0
    distill_seconds: float = 0.0
    generate_seconds: float = 0.0
    contended: bool = False
    failures: int = 0
    successes: int = 0
    levels_sha256: str = ''

    @property
    def cell(self) -> BenchCell:
        return BenchCell(self.domain, self.size, self.fraction, self.n_levels)

    def to_row(self) -> Dict[str, Any]:
        """CSV row; times in seconds with millisecond precision."""
        return {
            'method': self.method,
            'domain': self.domain,
            'size': self.size,
            'fraction': self.fraction,
            'n_levels': self.n_levels,
            'seed': self.seed,
            'elapsed_s': f"{self.elapsed_seconds:.3f}",
            'ga_s': f"{self.ga_seconds:.3f}",
            'distill_s': f"{self.distill_seconds:.3f}",
            'generate_s': f"{self.generate_seconds:.3f}",
            'contended': int(self.contended),
            'failures': self.failures,
            'levels_sha256': self.levels_sha256
        }


@dataclass
class BenchSummary:
    """Mean and standard deviation of one method's elapsed time over seeds."""
    method: str
    domain: str
    size: int
    fraction: float
    n_levels: int
    seeds: int
    mean_seconds: float
    std_seconds: float
    mean_ga_seconds: float
    mean_distill_seconds: float
    mean_generate_seconds: float
    failure_rate: float
    degraded: bool

    def to_row(self) -> Dict[str, Any]:
        return {
            'method': self.method,
            'domain': self.domain,
            'size': self.size,
            'fraction': self.fraction,
            'n_levels': self.n_levels,
            'seeds': self.seeds,
            'mean_s': f"{self.mean_seconds:.3f}",
            'std_s': f"{self.std_seconds:.3f}",
            'mean_ga_s': f"{self.mean_ga_seconds:.3f}",
            'mean_distill_s': f"{self.mean_distill_seconds:.3f}",
            'mean_generate_s': f"{self.mean_generate_seconds:.3f}",
            'failure_rate': f"{self.failure_rate:.3f}",
            'degraded': int(self.degraded)
        }

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> 'BenchSummary':
        """
        Parse a summary CSV row.

        Raises:
            ConfigError: If a column is missing or malformed
        """
        try:
            return cls(
                method=row['method'],
                domain=row['domain'],
                size=int(row['size']),
                fraction=float(row['fraction']),
                n_levels=int(row['n_levels']),
                seeds=int(row['seeds']),
                mean_seconds=float(row['mean_s']),
                std_seconds=float(row['std_s']),
                mean_ga_seconds=float(row['mean_ga_s']),
                mean_distill_seconds=float(row['mean_distill_s']),
                mean_generate_seconds=float(row['mean_generate_s']),
                failure_rate=float(row['failure_rate']),
                degraded=bool(int(row['degraded']))
            )
        except (KeyError, ValueError) as e:
            raise ConfigError(f"malformed summary row: {e}") from e
