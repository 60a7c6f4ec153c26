"""
Maze domain: random wall placement, BFS solvability and the maze fitness function.

The agent starts in the top-left cell and must reach the bottom-right cell,
moving between 4-connected empty cells.
"""

from collections import deque
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.config.settings import config
from src.models.errors import ConfigError
from src.models.genetics import GaConfig, Gene
from src.models.level import Level, TileAlphabet, TileType, format_level
from src.models.policy import PolicyConfig
from src.services.domain import DomainPlugin

EMPTY = 0
WALL = 1
MAZE_ALPHABET = TileAlphabet([
    TileType(id=EMPTY, glyph=config['maze'].GLYPHS[0]),
    TileType(id=WALL, glyph=config['maze'].GLYPHS[1]),
])


@dataclass(frozen=True)
class MazeConfig:
    """Square maze of size D with a fixed number of walls."""
    size: int
    wall_count: Optional[int] = None

    def __post_init__(self):
        if self.size < config['maze'].MIN_SIZE:
            raise ConfigError(f"maze size must be at least {config['maze'].MIN_SIZE}, got {self.size}")
        if self.wall_count is None:
            object.__setattr__(self, 'wall_count',
                               int(round(config['maze'].WALL_DENSITY * self.size * self.size)))
        if not 0 <= self.wall_count <= self.size * self.size - 2:
            raise ConfigError(
                f"{self.wall_count} walls cannot fit a {self.size}x{self.size} maze "
                f"with a free start and goal")


@dataclass(frozen=True)
class MazeFitnessBreakdown:
    """Components of the maze fitness and their weighted total."""
    finishable: int
    ratio_x: float
    ratio_y: float
    path_length: int
    total: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def random_maze(cfg: MazeConfig, rng: np.random.Generator) -> Level:
    """
    Place cfg.wall_count walls uniformly at random, never on the start or goal.

    Args:
        cfg: Maze size and wall count
        rng: Random generator

    Returns:
        A maze level with exactly cfg.wall_count walls
    """
    cells = cfg.size * cfg.size
    candidates = np.arange(1, cells - 1)
    chosen = rng.choice(candidates, size=cfg.wall_count, replace=False)
    flat = np.zeros(cells, dtype=np.uint8)
    flat[chosen] = WALL
    return Level._trusted(flat.reshape(cfg.size, cfg.size), MAZE_ALPHABET)


def _bfs(level: Level) -> Optional[List[Tuple[int, int]]]:
    """Shortest start-to-goal path as (x, y) cells, or None when unreachable."""
    width, height = level.width, level.height
    walls = (level.flat() == WALL).tolist()
    start, goal = 0, width * height - 1
    if walls[start] or walls[goal]:
        return None
    parent = [-1] * (width * height)
    parent[start] = start
    queue = deque([start])
    while queue:
        current = queue.popleft()
        if current == goal:
            break
        x, y = current % width, current // width
        for nx, ny in ((x + 1, y), (x, y + 1), (x - 1, y), (x, y - 1)):
            if 0 <= nx < width and 0 <= ny < height:
                neighbour = ny * width + nx
                if parent[neighbour] < 0 and not walls[neighbour]:
                    parent[neighbour] = current
                    queue.append(neighbour)
    if parent[goal] < 0:
        return None
    path = [goal]
    while path[-1] != start:
        path.append(parent[path[-1]])
    path.reverse()
    return [(cell % width, cell // width) for cell in path]


def shortest_path(level: Level) -> Optional[int]:
    """
    Length of the shortest 4-connected path from (0, 0) to the opposite corner.

    Returns:
        Number of cells on the path, endpoints included, or None if unreachable
    """
    path = _bfs(level)
    return len(path) if path is not None else None


def maze_fitness(level: Level, balanced_ratios: bool = False) -> MazeFitnessBreakdown:
    """
    Evaluate 0.7*Finishable + 0.2*RatioX + 0.2*RatioY + 0.0001*PathLength.

    RatioX is the share of walls with x < floor(width / 2); RatioY the share
    with y < floor(height / 2). Both are 0.5 for a wall-free maze. With
    balanced_ratios each ratio r is replaced by 1 - |r - 0.5| * 2.
    """
    walls = level.cells == WALL
    total_walls = int(walls.sum())
    if total_walls == 0:
        ratio_x = ratio_y = 0.5
    else:
        ratio_x = int(walls[:, :level.width // 2].sum()) / total_walls
        ratio_y = int(walls[:level.height // 2, :].sum()) / total_walls
    if balanced_ratios:
        ratio_x = 1.0 - abs(ratio_x - 0.5) * 2.0
        ratio_y = 1.0 - abs(ratio_y - 0.5) * 2.0
    length = shortest_path(level)
    finishable = 1 if length is not None else 0
    path_length = length or 0
    total = 0.7 * finishable + 0.2 * ratio_x + 0.2 * ratio_y + 0.0001 * path_length
    return MazeFitnessBreakdown(finishable, ratio_x, ratio_y, path_length, total)


def render_maze(level: Level, show_path: bool = False) -> str:
    """Text rendering; with show_path the BFS path is overlaid as '*'."""
    text = format_level(level)
    if not show_path:
        return text
    path = _bfs(level)
    if path is None:
        return text
    header, *rows = text.rstrip("\n").split("\n")
    grid = [list(row) for row in rows]
    for x, y in path:
        grid[y][x] = config['maze'].PATH_GLYPH
    return header + "\n" + "".join("".join(row) + "\n" for row in grid)


class MazeDomain(DomainPlugin):
    """Maze plugin; genes are row-major lists of wall coordinates."""

    name = 'maze'
    alphabet = MAZE_ALPHABET

    def __init__(self, size: int = config['maze'].DEFAULT_SIZE, balanced_ratios: bool = False,
                 wall_count: Optional[int] = None):
        self.maze = MazeConfig(size=size, wall_count=wall_count)
        self.balanced_ratios = balanced_ratios
        self.fitness_threshold = config['maze'].FITNESS_THRESHOLD
        self._goal = (size - 1, size - 1)

    @property
    def size(self) -> int:
        return self.maze.size

    def params(self) -> Dict[str, Any]:
        return {'size': self.size, 'balanced_ratios': self.balanced_ratios,
                'wall_count': self.maze.wall_count}

    def ga_config(self, **overrides: Any) -> GaConfig:
        settings = config['maze']
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
        values = dict(p=config['maze'].P, fitness_threshold=self.fitness_threshold)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return PolicyConfig(**values)

    def random_level(self, rng: np.random.Generator) -> Level:
        return random_maze(self.maze, rng)

    def evaluate(self, level: Level) -> MazeFitnessBreakdown:
        return maze_fitness(level, self.balanced_ratios)

    def gene_encode(self, level: Level) -> Gene:
        ys, xs = np.nonzero(level.cells == WALL)
        return Gene(tuple((int(x), int(y)) for x, y in zip(xs, ys)))

    def gene_decode(self, gene: Gene) -> Level:
        cells = np.zeros((self.size, self.size), dtype=np.uint8)
        for x, y in gene.units:
            cells[y, x] = WALL
        return Level._trusted(cells, MAZE_ALPHABET)

    def _draw_free_cell(self, occupied: set, rng: np.random.Generator) -> Optional[Tuple[int, int]]:
        """Uniform draw over cells that are neither occupied nor an endpoint (rejection sampling)."""
        cells = self.size * self.size
        if len(occupied) >= cells - 2:
            return None
        while True:
            index = int(rng.integers(1, cells - 1))
            cell = (index % self.size, index // self.size)
            if cell not in occupied:
                return cell

    def mutate_unit(self, gene: Gene, position: int, rng: np.random.Generator) -> Gene:
        """Move the wall at position to a uniformly drawn empty, non-endpoint cell."""
        cell = self._draw_free_cell(set(gene.units), rng)
        if cell is None:
            return gene
        return gene.replace(position, cell)

    def repair(self, gene: Gene, rng: np.random.Generator) -> Gene:
        """Relocate duplicated wall coordinates so the wall count stays exact."""
        if len(set(gene.units)) == len(gene):
            return gene
        seen = set()
        units = list(gene.units)
        duplicates = []
        for position, unit in enumerate(units):
            if unit in seen:
                duplicates.append(position)
            seen.add(unit)
        for position in duplicates:
            units[position] = self._draw_free_cell(seen, rng)
            seen.add(units[position])
        return Gene(tuple(units))

    def render(self, level: Level, show_path: bool = False) -> str:
        return render_maze(level, show_path)

    def check_level(self, level: Level) -> None:
        super().check_level(level)
        if level.shape != (self.size, self.size):
            raise ConfigError(f"expected a {self.size}x{self.size} maze, got {level.width}x{level.height}")
