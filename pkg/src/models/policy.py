"""
Data models for the nearest-neighbour policy.
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict

from src.config.settings import config
from src.models.errors import ConfigError
from src.models.level import Level

METRICS = ('hamming', 'euclidean')
EXTENSION_MODES = ('proportion', 'printed')


@dataclass(frozen=True)
class PolicyConfig:
    """
    Settings for querying the policy.

    fitness_guard discards an extended run that lowers fitness and tries the
    next nearest state instead, up to max_retries times per query.
    follow_end_level keeps an attempt on trajectories that lead to the same
    end level as its first match.
    """
    p: float
    fitness_threshold: float
    max_steps: int = config['policy'].MAX_STEPS
    max_restarts: int = config['policy'].MAX_RESTARTS
    metric: str = config['policy'].METRIC
    extension_mode: str = config['policy'].EXTENSION_MODE
    fitness_guard: bool = config['policy'].FITNESS_GUARD
    max_retries: int = config['policy'].MAX_RETRIES
    follow_end_level: bool = config['policy'].FOLLOW_END_LEVEL

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p must lie in (0, 1], got {self.p}")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be at least 1")
        if self.max_restarts < 0:
            raise ConfigError("max_restarts must be non-negative")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be non-negative")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.extension_mode not in EXTENSION_MODES:
            raise ConfigError(f"extension_mode must be one of {EXTENSION_MODES}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PolicyConfig':
        return cls(**{key: data[key] for key in cls.__dataclass_fields__ if key in data})


@dataclass(frozen=True)
class ExtendedRun:
    """Outcome of one temporally extended action."""
    level: Level
    actions_applied: int
    start_index: int
    end_index: int
    trajectory: int
    distance: int


@dataclass(frozen=True)
class GenerationResult:
    """An acceptable level produced by the policy loop."""
    level: Level
    attempts: int
    policy_queries: int
    actions_applied: int
    wall_clock_seconds: float
    fitness: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            'attempts': self.attempts,
            'policy_queries': self.policy_queries,
            'actions_applied': self.actions_applied,
            'wall_clock_seconds': round(self.wall_clock_seconds, 3),
            'fitness': self.fitness
        }
