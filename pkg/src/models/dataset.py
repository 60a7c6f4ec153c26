"""
Data models for the behaviour-cloning dataset.

File format (ASCII, one record per line)::

    PCGDATA v1 <width> <height> alphabet=<glyphs>
    trajectories <count> pairs <total>
    trajectory <index> <start> <end> <delta_length>
    <state glyphs, row-major, width*height chars> <x> <y> <t>
    ...

Each ``trajectory`` line is followed by exactly ``end - start`` records.
"""

from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from src.models.errors import DatasetError, LevelFormatError
from src.models.level import Action, ChangeSet, Level, TileAlphabet

MAGIC = "PCGDATA"
VERSION = "v1"


@dataclass(frozen=True)
class TrajectoryPair:
    """A start level, its evolved end level and the edits between them."""
    start: Level
    end: Level
    delta: ChangeSet


class PolicyDataset:
    """Ordered (state, action) pairs grouped into trajectories."""

    def __init__(self, width: int, height: int, alphabet: TileAlphabet, states: np.ndarray,
                 actions: np.ndarray, trajectory_bounds: Sequence[Tuple[int, int]],
                 delta_lengths: Sequence[int]):
        states = np.asarray(states, dtype=np.uint8).reshape(-1, width * height)
        actions = np.asarray(actions, dtype=np.int64).reshape(-1, 3)
        if len(states) != len(actions):
            raise DatasetError(f"{len(states)} states but {len(actions)} actions")
        if len(trajectory_bounds) != len(delta_lengths):
            raise DatasetError("trajectory bounds and delta lengths disagree in count")
        cursor = 0
        for (start, end), length in zip(trajectory_bounds, delta_lengths):
            if start != cursor or end < start or end - start != length:
                raise DatasetError(f"trajectory bounds ({start}, {end}) are not contiguous")
            cursor = end
        if cursor != len(states):
            raise DatasetError(f"trajectories cover {cursor} pairs, dataset holds {len(states)}")
        states.setflags(write=False)
        actions.setflags(write=False)
        self.width = width
        self.height = height
        self.alphabet = alphabet
        self.states = states
        self.actions = actions
        self.trajectory_bounds = [(int(s), int(e)) for s, e in trajectory_bounds]
        self.delta_lengths = [int(n) for n in delta_lengths]
        self._ends = np.array([end for _, end in self.trajectory_bounds], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def trajectory_count(self) -> int:
        return len(self.trajectory_bounds)

    def state(self, index: int) -> Level:
        return Level._trusted(self.states[index].reshape(self.height, self.width).copy(), self.alphabet)

    def action(self, index: int) -> Action:
        x, y, t = self.actions[index]
        return Action(int(x), int(y), int(t))

    @property
    def pairs(self) -> Iterator[Tuple[Level, Action]]:
        for index in range(len(self)):
            yield self.state(index), self.action(index)

    def trajectory_of(self, index: int) -> int:
        """Index of the trajectory holding pair index."""
        if not 0 <= index < len(self):
            raise IndexError(f"pair index {index} out of range")
        return int(np.searchsorted(self._ends, index, side='right'))

    def to_text(self) -> str:
        """Serialize to the line-oriented dataset format."""
        lut = np.frombuffer(self.alphabet.glyphs.encode('ascii'), dtype=np.uint8)
        glyph_rows = lut[self.states]
        lines = [f"{MAGIC} {VERSION} {self.width} {self.height} alphabet={self.alphabet.glyphs}",
                 f"trajectories {self.trajectory_count} pairs {len(self)}"]
        for index, ((start, end), length) in enumerate(zip(self.trajectory_bounds, self.delta_lengths)):
            lines.append(f"trajectory {index} {start} {end} {length}")
            for row in range(start, end):
                x, y, t = self.actions[row]
                lines.append(f"{glyph_rows[row].tobytes().decode('ascii')} {x} {y} {t}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> 'PolicyDataset':
        """
        Parse the dataset format.

        Raises:
            DatasetError: On any header, count or record mismatch
        """
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if len(lines) < 2:
            raise DatasetError("dataset file is truncated")
        header = lines[0].split()
        if len(header) != 5 or header[0] != MAGIC or header[1] != VERSION \
                or not header[4].startswith("alphabet="):
            raise DatasetError(f"bad dataset header {lines[0]!r}")
        try:
            width, height = int(header[2]), int(header[3])
            alphabet = TileAlphabet.from_glyphs(header[4][len("alphabet="):])
            counts = lines[1].split()
            if len(counts) != 4 or counts[0] != "trajectories" or counts[2] != "pairs":
                raise DatasetError(f"bad count line {lines[1]!r}")
            trajectory_count, pair_count = int(counts[1]), int(counts[3])
        except ValueError as e:
            raise DatasetError(f"bad dataset header: {e}") from e

        lut = np.full(256, 255, dtype=np.uint8)
        for tile in alphabet.tiles:
            lut[ord(tile.glyph)] = tile.id
        cells = width * height
        states = np.empty((pair_count, cells), dtype=np.uint8)
        actions = np.empty((pair_count, 3), dtype=np.int64)
        bounds: List[Tuple[int, int]] = []
        lengths: List[int] = []
        row, position = 0, 2
        try:
            for expected in range(trajectory_count):
                fields = lines[position].split()
                if len(fields) != 5 or fields[0] != "trajectory" or int(fields[1]) != expected:
                    raise DatasetError(f"line {position + 1}: expected trajectory {expected}")
                start, end, length = int(fields[2]), int(fields[3]), int(fields[4])
                bounds.append((start, end))
                lengths.append(length)
                position += 1
                for _ in range(end - start):
                    glyphs, x, y, t = lines[position].split(" ")
                    if len(glyphs) != cells:
                        raise DatasetError(f"line {position + 1}: state has {len(glyphs)} cells, expected {cells}")
                    ids = lut[np.frombuffer(glyphs.encode('ascii'), dtype=np.uint8)]
                    if (ids == 255).any():
                        raise DatasetError(f"line {position + 1}: glyph outside alphabet")
                    action = Action(int(x), int(y), int(t))
                    if not (0 <= action.x < width and 0 <= action.y < height and action.t in alphabet):
                        raise DatasetError(f"line {position + 1}: invalid action {action}")
                    states[row] = ids
                    actions[row] = (action.x, action.y, action.t)
                    row += 1
                    position += 1
        except IndexError as e:
            raise DatasetError("dataset file is truncated") from e
        except (ValueError, UnicodeEncodeError, LevelFormatError) as e:
            raise DatasetError(f"line {position + 1}: {e}") from e
        if row != pair_count or position != len(lines):
            raise DatasetError(f"dataset declares {pair_count} pairs but holds {row}")
        return cls(width, height, alphabet, states, actions, bounds, lengths)
