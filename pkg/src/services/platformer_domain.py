"""
Side-scrolling platformer domain.

Playability is judged by a deterministic scripted agent that walks the level
column by column from left to right. Rows are numbered from the top, so a
smaller row index means higher up.

Agent rules:
    - spawn standing on the topmost solid tile of column 0 (loss if none);
    - a landing surface is a solid tile whose upper neighbour is not solid;
    - when advancing it may land on a surface at most MAX_STEP_UP rows above
      its current ground, or any amount below; the surface closest to the
      current ground wins, the higher one on ties;
    - a column with solid tiles at or below the step-up band but no reachable
      surface is a wall and ends the run;
    - a column without any solid tile at or below the step-up band is
      floorless; up to MAX_GAP consecutive floorless columns are jumped;
    - standing in a cell holding an enemy ends the run;
    - a power-up in the standing cell or the cell above it is collected.
"""

import enum
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional

import numpy as np

from src.config.settings import config
from src.models.errors import ConfigError
from src.models.genetics import GaConfig, Gene
from src.models.level import Level, TileAlphabet, TileType
from src.models.policy import PolicyConfig
from src.services.domain import DomainPlugin

AIR = 0
SOLID = 1
ENEMY = 2
COIN = 3
POWER_UP = 4
PLATFORMER_ALPHABET = TileAlphabet(
    [TileType(id=i, glyph=g) for i, g in enumerate(config['platformer'].GLYPHS)])


class WinState(str, enum.Enum):
    TIMEOUT = 'timeout'
    LOSS = 'loss'
    WIN = 'win'


WIN_VALUES = {WinState.TIMEOUT: 0.1, WinState.LOSS: 0.4, WinState.WIN: 1.0}


@dataclass(frozen=True)
class PlatformerConfig:
    """Level size, generation bias and scripted-agent constants."""
    width: int = config['platformer'].WIDTH
    height: int = config['platformer'].HEIGHT
    air_bias: float = config['platformer'].AIR_BIAS
    spawn_columns: int = config['platformer'].SPAWN_COLUMNS
    max_step_up: int = config['platformer'].MAX_STEP_UP
    max_gap: int = config['platformer'].MAX_GAP
    ticks_per_column: int = config['platformer'].TICKS_PER_COLUMN

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ConfigError(f"platformer levels need at least 2x2 tiles, got {self.width}x{self.height}")
        if not 0.0 < self.air_bias <= 1.0:
            raise ConfigError(f"air_bias must lie in (0, 1], got {self.air_bias}")

    @property
    def tick_budget(self) -> int:
        return self.ticks_per_column * self.width


@dataclass(frozen=True)
class SimOutcome:
    """Result of one scripted-agent run."""
    win_state: WinState
    completion: float
    power_up_collected: int
    columns_traversed: int


@dataclass(frozen=True)
class PlatformerFitnessBreakdown:
    """WinState + 2 * completion + 0.5 * power-up state."""
    win_value: float
    completion: float
    mario_state: int
    total: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _column_distribution(cfg: PlatformerConfig) -> np.ndarray:
    others = (1.0 - cfg.air_bias) / (len(PLATFORMER_ALPHABET) - 1)
    return np.array([cfg.air_bias] + [others] * (len(PLATFORMER_ALPHABET) - 1))


def _random_column(cfg: PlatformerConfig, column: int, rng: np.random.Generator) -> np.ndarray:
    tiles = rng.choice(len(PLATFORMER_ALPHABET), size=cfg.height, p=_column_distribution(cfg))
    if column < cfg.spawn_columns:
        tiles[-1] = SOLID
    return tiles.astype(np.uint8)


def random_platformer_level(cfg: PlatformerConfig, rng: np.random.Generator) -> Level:
    """
    Draw a random level biased towards air.

    Each cell is air with probability cfg.air_bias, otherwise uniform over
    the other tile types; the bottom cell of the first spawn_columns columns
    is forced solid.
    """
    cells = rng.choice(len(PLATFORMER_ALPHABET), size=(cfg.height, cfg.width),
                       p=_column_distribution(cfg)).astype(np.uint8)
    cells[-1, :cfg.spawn_columns] = SOLID
    return Level._trusted(cells, PLATFORMER_ALPHABET)


def _surfaces(column: List[int]) -> List[int]:
    """Rows of solid tiles whose upper neighbour is not solid."""
    return [row for row, tile in enumerate(column)
            if tile == SOLID and (row == 0 or column[row - 1] != SOLID)]


def simulate_agent(level: Level, cfg: Optional[PlatformerConfig] = None) -> SimOutcome:
    """
    Run the scripted agent over a level.

    Args:
        level: Platformer level
        cfg: Agent constants; defaults to the standard platformer settings

    Returns:
        SimOutcome, a pure function of the level
    """
    cfg = cfg or PlatformerConfig(width=level.width, height=level.height)
    width = level.width
    columns = level.cells.T.tolist()

    def outcome(state: WinState, traversed: int, power: bool) -> SimOutcome:
        completion = 1.0 if state is WinState.WIN else traversed / width
        return SimOutcome(state, completion, int(power), traversed)

    def touches(column: int, row: int, tile: int) -> bool:
        return 0 <= row < level.height and columns[column][row] == tile

    spawn = _surfaces(columns[0])
    if not spawn:
        return outcome(WinState.LOSS, 0, False)
    ground = spawn[0]
    if touches(0, ground - 1, ENEMY):
        return outcome(WinState.LOSS, 0, False)
    power = touches(0, ground - 1, POWER_UP) or touches(0, ground - 2, POWER_UP)

    column, ticks = 0, 0
    while column < width - 1:
        if ticks >= cfg.tick_budget:
            return outcome(WinState.TIMEOUT, column + 1, power)
        landing = None
        for step in range(1, cfg.max_gap + 2):
            target = column + step
            if target >= width:
                break
            band_top = ground - cfg.max_step_up
            reachable = [row for row in _surfaces(columns[target]) if row >= band_top]
            if reachable:
                landing = (target, min(reachable, key=lambda row: (abs(row - ground), row)))
                break
            if any(tile == SOLID for tile in columns[target][max(band_top, 0):]):
                # wall: solid tiles in the band but every surface is too high
                return outcome(WinState.LOSS, column + 1, power)
        if landing is None:
            return outcome(WinState.LOSS, column + 1, power)
        target, ground = landing
        ticks += target - column
        column = target
        if touches(column, ground - 1, ENEMY):
            return outcome(WinState.LOSS, column, power)
        power = power or touches(column, ground - 1, POWER_UP) or touches(column, ground - 2, POWER_UP)

    return outcome(WinState.WIN, width, power)


def platformer_fitness(level: Level, cfg: Optional[PlatformerConfig] = None) -> PlatformerFitnessBreakdown:
    """Score win value + 2 * completion + 0.5 * power-up collected."""
    sim = simulate_agent(level, cfg)
    win_value = WIN_VALUES[sim.win_state]
    total = win_value + 2.0 * sim.completion + 0.5 * sim.power_up_collected
    return PlatformerFitnessBreakdown(win_value, sim.completion, sim.power_up_collected, total)


class PlatformerDomain(DomainPlugin):
    """Platformer plugin; genes are column-major sequences of tile columns."""

    name = 'platformer'
    alphabet = PLATFORMER_ALPHABET

    def __init__(self, air_bias: float = config['platformer'].AIR_BIAS,
                 width: int = config['platformer'].WIDTH, height: int = config['platformer'].HEIGHT):
        self.platformer = PlatformerConfig(width=width, height=height, air_bias=air_bias)
        self.fitness_threshold = config['platformer'].FITNESS_THRESHOLD

    def params(self) -> Dict[str, Any]:
        return {'air_bias': self.platformer.air_bias, 'width': self.platformer.width,
                'height': self.platformer.height}

    def ga_config(self, **overrides: Any) -> GaConfig:
        settings = config['platformer']
        values = dict(
            population_size=settings.POPULATION_SIZE,
            child_list_size=settings.CHILD_LIST_SIZE,
            crossover_points=settings.CROSSOVER_POINTS,
            mutation_rate=settings.MUTATION_RATE,
            max_iterations=settings.MAX_ITERATIONS,
            fitness_threshold=self.fitness_threshold,
            acceptable_fraction=config['evolution'].DEFAULT_ACCEPTABLE_FRACTION,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return GaConfig(**values)

    def policy_config(self, **overrides: Any) -> PolicyConfig:
        values = dict(p=config['platformer'].P, fitness_threshold=self.fitness_threshold,
                      follow_end_level=config['platformer'].FOLLOW_END_LEVEL)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return PolicyConfig(**values)

    def random_level(self, rng: np.random.Generator) -> Level:
        return random_platformer_level(self.platformer, rng)

    def evaluate(self, level: Level) -> PlatformerFitnessBreakdown:
        return platformer_fitness(level, self.platformer)

    def simulate(self, level: Level) -> SimOutcome:
        return simulate_agent(level, self.platformer)

    def gene_encode(self, level: Level) -> Gene:
        return Gene(tuple(tuple(column) for column in level.cells.T.tolist()))

    def gene_decode(self, gene: Gene) -> Level:
        cells = np.array(gene.units, dtype=np.uint8).T
        return Level._trusted(np.ascontiguousarray(cells), PLATFORMER_ALPHABET)

    def mutate_unit(self, gene: Gene, position: int, rng: np.random.Generator) -> Gene:
        """Re-sample the whole column at position (spawn columns keep their solid floor)."""
        column = _random_column(self.platformer, position, rng)
        return gene.replace(position, tuple(column.tolist()))

    def check_level(self, level: Level) -> None:
        super().check_level(level)
        expected = (self.platformer.width, self.platformer.height)
        if level.shape != expected:
            raise ConfigError(f"expected a {expected[0]}x{expected[1]} platformer level, "
                              f"got {level.width}x{level.height}")
