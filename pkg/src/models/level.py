"""
Domain-agnostic level, action and diff representations.

A level is a rectangular grid of tile ids drawn from a per-domain tile
alphabet. Levels are immutable values: every operation below returns a new
level instead of editing one in place.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence, Tuple, Union

import numpy as np

from src.models.errors import InvalidActionError, LevelFormatError, ShapeError


@dataclass(frozen=True)
class TileType:
    """A single tile kind: numeric id plus its text-format glyph."""
    id: int
    glyph: str


class TileAlphabet:
    """Ordered tile registry for one domain; tile ids equal their position."""

    def __init__(self, tiles: Sequence[TileType]):
        """
        Build an alphabet from tile definitions.

        Args:
            tiles: Tile types in id order (ids must be 0..n-1)

        Raises:
            ValueError: If ids are not contiguous or glyphs collide
        """
        if not tiles:
            raise ValueError("a tile alphabet needs at least one tile")
        for position, tile in enumerate(tiles):
            if tile.id != position:
                raise ValueError(f"tile ids must be 0..n-1 in order, got {tile.id} at {position}")
            if len(tile.glyph) != 1 or not tile.glyph.isascii() or not tile.glyph.isprintable() \
                    or tile.glyph.isspace():
                raise ValueError(f"glyph {tile.glyph!r} must be one printable ASCII character")
        glyphs = "".join(tile.glyph for tile in tiles)
        if len(set(glyphs)) != len(glyphs):
            raise ValueError(f"duplicate glyph in alphabet {glyphs!r}")
        self._tiles = tuple(tiles)
        self._glyphs = glyphs
        self._by_glyph = {tile.glyph: tile.id for tile in tiles}

    @classmethod
    def from_glyphs(cls, glyphs: str) -> 'TileAlphabet':
        """Create an alphabet whose tile ids are the glyph positions."""
        return cls([TileType(id=i, glyph=g) for i, g in enumerate(glyphs)])

    @property
    def glyphs(self) -> str:
        return self._glyphs

    @property
    def tiles(self) -> Tuple[TileType, ...]:
        return self._tiles

    @property
    def is_binary(self) -> bool:
        return len(self._tiles) == 2

    def glyph_of(self, tile_id: int) -> str:
        return self._glyphs[tile_id]

    def id_of(self, glyph: str) -> int:
        try:
            return self._by_glyph[glyph]
        except KeyError:
            raise LevelFormatError(f"glyph {glyph!r} is not in alphabet {self._glyphs!r}") from None

    def __contains__(self, tile_id: object) -> bool:
        return isinstance(tile_id, (int, np.integer)) and 0 <= int(tile_id) < len(self._tiles)

    def __len__(self) -> int:
        return len(self._tiles)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TileAlphabet) and other._glyphs == self._glyphs

    def __hash__(self) -> int:
        return hash(self._glyphs)

    def __repr__(self) -> str:
        return f"TileAlphabet({self._glyphs!r})"


class Level:
    """Immutable rectangular grid of tile ids, stored row-major as (height, width)."""

    __slots__ = ("_cells", "_alphabet")

    def __init__(self, cells: Union[np.ndarray, Sequence[Sequence[int]]], alphabet: TileAlphabet):
        array = np.array(cells, dtype=np.int64, copy=True)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ShapeError(f"level cells must be a non-empty 2D grid, got shape {array.shape}")
        if array.min() < 0 or array.max() >= len(alphabet):
            raise LevelFormatError(f"cell ids must lie in 0..{len(alphabet) - 1}")
        self._init(array.astype(np.uint8), alphabet)

    def _init(self, cells: np.ndarray, alphabet: TileAlphabet) -> None:
        cells.setflags(write=False)
        self._cells = cells
        self._alphabet = alphabet

    @classmethod
    def _trusted(cls, cells: np.ndarray, alphabet: TileAlphabet) -> 'Level':
        """Wrap an already validated uint8 grid without copying."""
        level = cls.__new__(cls)
        level._init(cells, alphabet)
        return level

    @classmethod
    def from_flat(cls, width: int, height: int, flat: Sequence[int], alphabet: TileAlphabet) -> 'Level':
        """Build a level from a row-major id vector of length width * height."""
        flat = np.asarray(flat)
        if flat.size != width * height:
            raise ShapeError(f"expected {width * height} cells, got {flat.size}")
        return cls(flat.reshape(height, width), alphabet)

    @classmethod
    def filled(cls, width: int, height: int, tile_id: int, alphabet: TileAlphabet) -> 'Level':
        return cls(np.full((height, width), tile_id), alphabet)

    @property
    def width(self) -> int:
        return int(self._cells.shape[1])

    @property
    def height(self) -> int:
        return int(self._cells.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        """(width, height) of the level."""
        return self.width, self.height

    @property
    def alphabet(self) -> TileAlphabet:
        return self._alphabet

    @property
    def cells(self) -> np.ndarray:
        """Read-only (height, width) grid of tile ids."""
        return self._cells

    def flat(self) -> np.ndarray:
        """Read-only row-major id vector of length width * height."""
        return self._cells.reshape(-1)

    def tile(self, x: int, y: int) -> int:
        return int(self._cells[y, x])

    def count(self, tile_id: int) -> int:
        return int(np.count_nonzero(self._cells == tile_id))

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Level):
            return NotImplemented
        return (self._alphabet == other._alphabet
                and self._cells.shape == other._cells.shape
                and bool(np.array_equal(self._cells, other._cells)))

    def __hash__(self) -> int:
        return hash((self._cells.shape, self._cells.tobytes(), self._alphabet))

    def __repr__(self) -> str:
        return f"Level({self.width}x{self.height}, alphabet={self._alphabet.glyphs!r})"


@dataclass(frozen=True, order=True)
class Action:
    """A single tile edit: set cell (x, y) to tile id t."""
    x: int
    y: int
    t: int


@dataclass(frozen=True)
class ChangeSet:
    """Ordered tile edits; each (x, y) cell is assigned at most once."""
    actions: Tuple[Action, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'actions', tuple(self.actions))
        seen = set()
        for index, action in enumerate(self.actions):
            key = (action.x, action.y)
            if key in seen:
                raise InvalidActionError(f"coordinate {key} assigned twice", index=index)
            seen.add(key)

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self) -> Iterator[Action]:
        return iter(self.actions)


def _require_same_shape(a: Level, b: Level) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"level shapes differ: {a.shape} vs {b.shape}")
    if a.alphabet != b.alphabet:
        raise ShapeError(f"tile alphabets differ: {a.alphabet.glyphs!r} vs {b.alphabet.glyphs!r}")


def _check_action(level: Level, action: Action, index: int = None) -> None:
    if not level.in_bounds(action.x, action.y):
        raise InvalidActionError(
            f"({action.x}, {action.y}) is outside a {level.width}x{level.height} level", index=index)
    if action.t not in level.alphabet:
        raise InvalidActionError(f"unknown tile id {action.t}", index=index)


def compute_diffs(start: Level, end: Level) -> ChangeSet:
    """
    Compute the tile edits that turn start into end.

    Args:
        start: Source level
        end: Target level with the same shape and alphabet

    Returns:
        ChangeSet with one action per differing cell, row-major by (y, x)

    Raises:
        ShapeError: If the levels differ in shape or alphabet
    """
    _require_same_shape(start, end)
    ys, xs = np.nonzero(start.cells != end.cells)
    targets = end.cells[ys, xs]
    return ChangeSet(tuple(Action(int(x), int(y), int(t)) for x, y, t in zip(xs, ys, targets)))


def apply_action(level: Level, action: Action) -> Level:
    """
    Return a copy of level with one cell overwritten.

    Raises:
        InvalidActionError: If the action is out of bounds or names an unknown tile
    """
    _check_action(level, action)
    if level.tile(action.x, action.y) == action.t:
        return level
    cells = level.cells.copy()
    cells[action.y, action.x] = action.t
    return Level._trusted(cells, level.alphabet)


def apply_changes(level: Level, changes: Union[ChangeSet, Sequence[Action]]) -> Level:
    """
    Apply a sequence of actions in order.

    Raises:
        InvalidActionError: Carrying the index of the first invalid action
    """
    actions = list(changes)
    for index, action in enumerate(actions):
        _check_action(level, action, index=index)
    if not actions:
        return level
    cells = level.cells.copy()
    for action in actions:
        cells[action.y, action.x] = action.t
    return Level._trusted(cells, level.alphabet)


def hamming_distance(a: Level, b: Level) -> int:
    """Number of cells whose tile ids differ."""
    _require_same_shape(a, b)
    return int(np.count_nonzero(a.cells != b.cells))


def format_level(level: Level) -> str:
    """Serialize a level: "width height" line, then one glyph row per line."""
    glyphs = np.array(list(level.alphabet.glyphs))
    rows = ["".join(row) for row in glyphs[level.cells]]
    return f"{level.width} {level.height}\n" + "".join(row + "\n" for row in rows)


def parse_level(text: str, alphabet: TileAlphabet) -> Level:
    """
    Parse the strict text level format.

    Raises:
        LevelFormatError: On a malformed header, wrong row count or row length,
            non-ASCII input, a missing final newline, or an unknown glyph
    """
    if not text.isascii():
        raise LevelFormatError("level text must be ASCII")
    if not text.endswith("\n"):
        raise LevelFormatError("level text must be newline-terminated")
    lines = text[:-1].split("\n")
    header = lines[0].split()
    if len(header) != 2 or not all(part.isdigit() for part in header):
        raise LevelFormatError(f"bad header line {lines[0]!r}, expected 'width height'")
    width, height = int(header[0]), int(header[1])
    if width < 1 or height < 1:
        raise LevelFormatError(f"level dimensions must be positive, got {width}x{height}")
    rows = lines[1:]
    if len(rows) != height:
        raise LevelFormatError(f"expected {height} rows, found {len(rows)}")
    cells = np.empty((height, width), dtype=np.uint8)
    for y, row in enumerate(rows):
        if len(row) != width:
            raise LevelFormatError(f"row {y} has {len(row)} glyphs, expected {width}")
        cells[y] = [alphabet.id_of(glyph) for glyph in row]
    return Level._trusted(cells, alphabet)


def read_level_file(path: Union[str, Path], alphabet: TileAlphabet) -> Level:
    """Read a level file; I/O errors surface as LevelFormatError."""
    try:
        text = Path(path).read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise LevelFormatError(f"cannot read level file {path}: {e}") from e
    return parse_level(text, alphabet)


def write_level_file(path: Union[str, Path], level: Level) -> None:
    Path(path).write_text(format_level(level), encoding="ascii", newline="\n")
