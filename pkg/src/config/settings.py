"""
Configuration settings for the level-generation toolkit.
"""

import os
from dataclasses import dataclass, field
from typing import Tuple

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class MazeSettings:
    """Maze domain hyperparameters (population, operators, termination)."""
    DEFAULT_SIZE: int = 10
    MIN_SIZE: int = 2
    WALL_DENSITY: float = 0.15
    POPULATION_SIZE: int = 50
    CHILD_LIST_SIZE: int = 20
    CROSSOVER_POINTS: int = 50
    MUTATION_RATE: float = 0.05
    MAX_ITERATIONS: int = 1000
    FITNESS_THRESHOLD: float = 1.0
    P: float = 0.06
    GLYPHS: str = '.#'
    PATH_GLYPH: str = '*'


@dataclass(frozen=True)
class PlatformerSettings:
    """Platformer domain hyperparameters and scripted-agent constants."""
    WIDTH: int = 101
    HEIGHT: int = 16
    AIR_BIAS: float = 0.80
    SPAWN_COLUMNS: int = 2
    MAX_STEP_UP: int = 4
    MAX_GAP: int = 3
    TICKS_PER_COLUMN: int = 10
    POPULATION_SIZE: int = 100
    CHILD_LIST_SIZE: int = 20
    CROSSOVER_POINTS: int = 101
    MUTATION_RATE: float = 0.05
    MAX_ITERATIONS: int = 1000
    FITNESS_THRESHOLD: float = 3.0
    P: float = 0.05
    FOLLOW_END_LEVEL: bool = True
    GLYPHS: str = '-XEoP'


@dataclass(frozen=True)
class EvolutionSettings:
    """Engine defaults shared by every domain."""
    ELITISM_FRACTION: float = 0.10
    DEFAULT_ACCEPTABLE_FRACTION: float = 1.0
    DEFAULT_SEED: int = 0


@dataclass(frozen=True)
class PolicySettings:
    """Policy loop defaults."""
    MAX_STEPS: int = 50
    MAX_RESTARTS: int = 25
    METRIC: str = 'hamming'
    EXTENSION_MODE: str = 'proportion'
    FITNESS_GUARD: bool = True
    MAX_RETRIES: int = 20
    FOLLOW_END_LEVEL: bool = False
    SCAN_CHUNK: int = 4096


@dataclass(frozen=True)
class BenchSettings:
    """Benchmark sweep defaults."""
    MAZE_SIZES: Tuple[int, ...] = (10, 20, 30, 40, 50)
    ACCEPTABLE_FRACTIONS: Tuple[float, ...] = (0.5, 1.0)
    MAZE_LEVELS_REQUIRED: Tuple[int, ...] = (10, 50, 100)
    PLATFORMER_LEVELS_REQUIRED: Tuple[int, ...] = (5, 10, 20)
    SEEDS: Tuple[int, ...] = tuple(range(10))
    DEGRADED_FAILURE_RATE: float = 0.5
    MAX_GA_RETRIES: int = 20
    RESULTS_FILE: str = 'results.csv'
    SUMMARY_FILE: str = 'summary.csv'


@dataclass(frozen=True)
class AppSettings:
    """Process-level settings, overridable through the environment or a .env file."""
    OUTPUT_DIR: str = field(default_factory=lambda: os.getenv('PCG_OUTPUT_DIR', 'output'))
    LOG_LEVEL: str = field(default_factory=lambda: os.getenv('PCG_LOG_LEVEL', 'INFO'))
    WORKERS: int = field(default_factory=lambda: int(os.getenv('PCG_WORKERS', '1')))
    RUN_FILE: str = 'run.json'
    POLICY_FILE: str = 'policy.json'
    DATASET_FILE: str = 'dataset.pcg'
    CONFIG_FILE: str = 'config.yaml'
    LEVEL_SUFFIX: str = '.lvl'


# Global configuration object
config = {
    'maze': MazeSettings(),
    'platformer': PlatformerSettings(),
    'evolution': EvolutionSettings(),
    'policy': PolicySettings(),
    'bench': BenchSettings(),
    'app': AppSettings()
}
