"""
Data models for the genetic algorithm.
"""

from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple

from src.config.settings import config
from src.models.errors import ConfigError
from src.models.level import Level


@dataclass(frozen=True)
class Gene:
    """Fixed-length chromosome; the meaning of a unit is up to the domain."""
    units: Tuple[Hashable, ...]

    def __post_init__(self):
        object.__setattr__(self, 'units', tuple(self.units))

    def __len__(self) -> int:
        return len(self.units)

    def __getitem__(self, position: int) -> Hashable:
        return self.units[position]

    def replace(self, position: int, unit: Hashable) -> 'Gene':
        units = list(self.units)
        units[position] = unit
        return Gene(tuple(units))


@dataclass(frozen=True)
class GaConfig:
    """Hyperparameters for one GA run."""
    population_size: int
    child_list_size: int
    crossover_points: int
    mutation_rate: float
    max_iterations: int
    fitness_threshold: float
    acceptable_fraction: float = 1.0
    elitism_count: Optional[int] = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        """Fill the elitism default and validate field ranges."""
        if self.elitism_count is None:
            fraction = config['evolution'].ELITISM_FRACTION
            object.__setattr__(self, 'elitism_count', max(1, round(fraction * self.population_size)))
        if self.population_size < 2:
            raise ConfigError(f"population_size must be at least 2, got {self.population_size}")
        if not 1 <= self.child_list_size <= self.population_size:
            raise ConfigError("child_list_size must lie in 1..population_size")
        if not 0 <= self.elitism_count < self.population_size:
            raise ConfigError("elitism_count must be smaller than population_size")
        if self.crossover_points < 1:
            raise ConfigError("crossover_points must be at least 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError(f"mutation_rate must lie in [0, 1], got {self.mutation_rate}")
        if not 0.0 < self.acceptable_fraction <= 1.0:
            raise ConfigError(f"acceptable_fraction must lie in (0, 1], got {self.acceptable_fraction}")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be non-negative")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit non-negative integer, got {self.seed}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GaConfig':
        return cls(**{key: data[key] for key in cls.__dataclass_fields__ if key in data})


@dataclass(frozen=True)
class Member:
    """A gene with its cached fitness."""
    gene: Gene
    fitness: float


@dataclass(frozen=True)
class Population:
    """One generation, members sorted by descending fitness."""
    members: Tuple[Member, ...]
    generation_index: int = 0

    def __post_init__(self):
        # stable sort keeps ties in creation order
        ordered = tuple(sorted(self.members, key=lambda m: -m.fitness))
        object.__setattr__(self, 'members', ordered)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def best_fitness(self) -> float:
        return self.members[0].fitness

    def child_list(self, size: int) -> Tuple[Member, ...]:
        return self.members[:size]

    def acceptable_count(self, size: int, threshold: float) -> int:
        return sum(1 for member in self.child_list(size) if member.fitness >= threshold)


@dataclass
class GaRunResult:
    """Output of one GA run: the random starting levels and the accepted final levels."""
    initial_levels: List[Level]
    final_levels: List[Level]
    generations_used: int
    wall_clock_seconds: float
    seed: int
    terminated_by: str = 'threshold'
    final_fitnesses: List[float] = field(default_factory=list)
    best_fitness_history: List[float] = field(default_factory=list)
    config: Optional[GaConfig] = None
    domain: str = ''

    @property
    def success(self) -> bool:
        return bool(self.final_levels)

    def to_dict(self) -> Dict[str, Any]:
        """Convert the run summary (everything except levels) to a JSON-ready dict."""
        return {
            'domain': self.domain,
            'seed': self.seed,
            'generations_used': self.generations_used,
            'wall_clock_seconds': round(self.wall_clock_seconds, 3),
            'terminated_by': self.terminated_by,
            'initial_count': len(self.initial_levels),
            'final_count': len(self.final_levels),
            'final_fitnesses': list(self.final_fitnesses),
            'best_fitness_history': list(self.best_fitness_history),
            'config': self.config.to_dict() if self.config else None
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], initial_levels: Sequence[Level],
                  final_levels: Sequence[Level]) -> 'GaRunResult':
        """Rebuild a run from its summary dict and the level files read back from disk."""
        config_data = data.get('config')
        return cls(
            initial_levels=list(initial_levels),
            final_levels=list(final_levels),
            generations_used=data['generations_used'],
            wall_clock_seconds=data['wall_clock_seconds'],
            seed=data['seed'],
            terminated_by=data.get('terminated_by', 'threshold'),
            final_fitnesses=list(data.get('final_fitnesses', [])),
            best_fitness_history=list(data.get('best_fitness_history', [])),
            config=GaConfig.from_dict(config_data) if config_data else None,
            domain=data.get('domain', '')
        )
