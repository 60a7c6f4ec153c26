"""
Nearest-neighbour policy over a behaviour-cloning dataset.

The policy looks up the recorded state closest to the current level and
replays a run of the actions that followed it in the same trajectory.

Within one generation attempt only pending actions are replayed: a recorded
action is pending while the level differs from it at its cell and it has not
been replayed earlier in the attempt. A dataset position is open when its
trajectory still holds a full run of pending actions from there on, and
lookups only consider open positions. With the fitness guard on, a run that
lowers fitness is undone and the next nearest open position outside the
rejected trajectory tail is tried instead.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import config
from src.models.dataset import PolicyDataset
from src.models.errors import DatasetError, GenerationFailedError, ShapeError
from src.models.level import Level, hamming_distance
from src.models.policy import ExtendedRun, GenerationResult, PolicyConfig
from src.services.domain import DomainPlugin

logger = logging.getLogger(__name__)

# set-bit count of every byte value
_POPCOUNT = np.array([bin(value).count("1") for value in range(256)], dtype=np.uint8)


class NeighbourIndex:
    """
    Exact 1-nearest-neighbour lookup over dataset states.

    States are scanned in insertion order, chunk by chunk, stopping early on
    an exact match; ties go to the lowest index. Binary alphabets under the
    hamming metric are compared bit-packed with a popcount table.
    """

    def __init__(self, dataset: PolicyDataset, metric: str = config['policy'].METRIC,
                 chunk_size: int = config['policy'].SCAN_CHUNK):
        if len(dataset) == 0:
            raise DatasetError("cannot index an empty dataset")
        self.width = dataset.width
        self.height = dataset.height
        self.alphabet = dataset.alphabet
        self.metric = metric
        self.chunk_size = chunk_size
        self.packed = metric == 'hamming' and dataset.alphabet.is_binary
        if self.packed:
            self._rows = np.packbits(dataset.states, axis=1)
        elif metric == 'euclidean':
            self._rows = dataset.states.astype(np.int32)
        else:
            self._rows = dataset.states

    def __len__(self) -> int:
        return len(self._rows)

    def _encode(self, state: Level) -> np.ndarray:
        if state.shape != (self.width, self.height):
            raise ShapeError(f"query level is {state.width}x{state.height}, "
                             f"dataset states are {self.width}x{self.height}")
        flat = state.flat()
        if self.packed:
            return np.packbits(flat)
        if self.metric == 'euclidean':
            return flat.astype(np.int32)
        return flat

    def _distances(self, rows: np.ndarray, query: np.ndarray) -> np.ndarray:
        if self.packed:
            return _POPCOUNT[np.bitwise_xor(rows, query)].sum(axis=1, dtype=np.int64)
        if self.metric == 'euclidean':
            diff = rows - query
            return np.einsum('ij,ij->i', diff, diff)
        return np.count_nonzero(rows != query, axis=1)

    def query(self, state: Level) -> Tuple[int, int]:
        """
        Nearest dataset state.

        Returns:
            (index, distance); distance is the hamming distance, or the squared
            euclidean distance over tile ids

        Raises:
            ShapeError: If the level shape differs from the dataset's
        """
        query = self._encode(state)
        best_index, best_distance = -1, None
        for lo in range(0, len(self._rows), self.chunk_size):
            distances = self._distances(self._rows[lo:lo + self.chunk_size], query)
            offset = int(np.argmin(distances))
            distance = int(distances[offset])
            if best_distance is None or distance < best_distance:
                best_index, best_distance = lo + offset, distance
                if distance == 0:
                    break
        return best_index, best_distance

    def ranked(self, state: Level, allowed: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Dataset states ordered by distance to state, lowest index first on ties.

        Args:
            state: Query level
            allowed: Boolean mask over dataset positions; all positions when omitted

        Returns:
            (indices, distances), both empty when nothing is allowed

        Raises:
            ShapeError: If the level shape differs from the dataset's
        """
        query = self._encode(state)
        candidates = np.arange(len(self._rows)) if allowed is None else np.flatnonzero(allowed)
        distances = np.empty(len(candidates), dtype=np.int64)
        for lo in range(0, len(candidates), self.chunk_size):
            chunk = candidates[lo:lo + self.chunk_size]
            distances[lo:lo + len(chunk)] = self._distances(self._rows[chunk], query)
        order = np.argsort(distances, kind='stable')
        return candidates[order], distances[order]


def nearest(index: NeighbourIndex, state: Level) -> int:
    """Dataset index of the state closest to state (lowest index on ties)."""
    return index.query(state)[0]


def extension_length(delta_length: int, cfg: PolicyConfig) -> int:
    """Number of actions one extended run applies for a trajectory of delta_length changes."""
    if cfg.extension_mode == 'printed':
        return max(1, math.floor(delta_length / cfg.p + 0.5))
    return max(1, math.floor(cfg.p * delta_length + 0.5))


class PolicyWalk:
    """
    Per-attempt replay state over a dataset.

    Holds which recorded actions were already replayed in the current attempt
    and, when following end levels, which end level the attempt is heading to.
    Call reset() before every attempt.
    """

    def __init__(self, dataset: PolicyDataset, cfg: PolicyConfig):
        self.dataset = dataset
        self.cfg = cfg
        lengths = np.array([end - start for start, end in dataset.trajectory_bounds], dtype=np.int64)
        starts = np.array([start for start, _ in dataset.trajectory_bounds], dtype=np.int64)
        run_lengths = np.array([extension_length(n, cfg) for n in dataset.delta_lengths], dtype=np.int64)
        self._trajectory = np.repeat(np.arange(len(lengths)), lengths)
        self._starts = np.repeat(starts, lengths)
        self._ends = np.repeat(starts + lengths, lengths)
        self._run_lengths = np.repeat(run_lengths, lengths)
        self._targets = dataset.actions[:, 1] * dataset.width + dataset.actions[:, 0]
        self._tiles = dataset.actions[:, 2].astype(np.uint8)
        self._groups = np.repeat(self._end_level_groups(starts, lengths), lengths)
        self.spent = np.zeros(len(dataset), dtype=bool)
        self.target: Optional[int] = None

    def _end_level_groups(self, starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        """Per trajectory, an id shared by trajectories that end on the same level (-1 when empty)."""
        groups = np.full(len(lengths), -1, dtype=np.int64)
        filled = np.flatnonzero(lengths > 0)
        if len(filled) == 0:
            return groups
        last = starts[filled] + lengths[filled] - 1
        ends = self.dataset.states[last].copy()
        ends[np.arange(len(last)), self._targets[last]] = self._tiles[last]
        _, inverse = np.unique(ends, axis=0, return_inverse=True)
        groups[filled] = inverse.reshape(-1)
        return groups

    def reset(self) -> None:
        self.spent[:] = False
        self.target = None

    def pending(self, state: Level) -> np.ndarray:
        """Mask of recorded actions that would still change state."""
        if state.shape != (self.dataset.width, self.dataset.height):
            raise ShapeError(f"level is {state.width}x{state.height}, "
                             f"dataset states are {self.dataset.width}x{self.dataset.height}")
        mask = (state.flat()[self._targets] != self._tiles) & ~self.spent
        if self.cfg.follow_end_level and self.target is not None:
            mask &= self._groups == self.target
        return mask

    def open_positions(self, pending: np.ndarray) -> np.ndarray:
        """Positions followed, within their trajectory, by a full run of pending actions."""
        after = np.concatenate([np.cumsum(pending[::-1])[::-1], [0]])
        remaining = after[:-1] - after[self._ends]
        needed = np.maximum(np.minimum(self._run_lengths, remaining[self._starts]), 1)
        return remaining >= needed

    def boundary(self, position: int) -> int:
        """End (exclusive) of the trajectory holding position."""
        return int(self._ends[position])

    def extend(self, state: Level, position: int, distance: int, pending: np.ndarray) -> ExtendedRun:
        """
        Replay the next run of pending actions from position and mark them spent.

        The first match of an attempt that follows end levels fixes the end
        level the rest of the attempt replays towards.
        """
        trajectory = int(self._trajectory[position])
        if self.cfg.follow_end_level and self.target is None:
            self.target = int(self._groups[position])
        boundary = self.boundary(position)
        chosen = position + np.flatnonzero(pending[position:boundary])[:self._run_lengths[position]]
        self.spent[chosen] = True
        cells = state.flat().copy()
        cells[self._targets[chosen]] = self._tiles[chosen]
        level = Level._trusted(cells.reshape(state.height, state.width), state.alphabet)
        end = int(chosen[-1]) + 1 if len(chosen) else position
        return ExtendedRun(level=level, actions_applied=len(chosen), start_index=position, end_index=end,
                           trajectory=trajectory, distance=distance)


def extended_action_run(index: NeighbourIndex, dataset: PolicyDataset, state: Level, cfg: PolicyConfig,
                        walk: Optional[PolicyWalk] = None) -> Optional[ExtendedRun]:
    """
    Apply a temporally extended action.

    Finds the nearest open recorded state k in trajectory i and applies the
    next extension_length(|delta_i|) pending actions from k on, stopping at
    the end of trajectory i. Repeated calls sharing a walk never replay the
    same recorded action twice.

    Args:
        index: Neighbour index built from dataset
        dataset: Policy dataset
        state: Current level
        cfg: Policy settings
        walk: Replay state of the current attempt; a fresh one when omitted

    Returns:
        ExtendedRun with the new level, or None when no position is open
    """
    walk = walk or PolicyWalk(dataset, cfg)
    pending = walk.pending(state)
    positions, distances = index.ranked(state, walk.open_positions(pending))
    if len(positions) == 0:
        return None
    return walk.extend(state, int(positions[0]), int(distances[0]), pending)


def _guarded_step(index: NeighbourIndex, walk: PolicyWalk, domain: DomainPlugin, level: Level,
                  fitness: float, cfg: PolicyConfig) -> Optional[Tuple[Optional[ExtendedRun], float]]:
    """
    One policy query: the first acceptable run among the nearest open positions.

    Returns:
        None when no position is open, else (run, fitness); run is None when
        every tried candidate lowered fitness
    """
    pending = walk.pending(level)
    positions, distances = index.ranked(level, walk.open_positions(pending))
    if len(positions) == 0:
        return None
    rejected: Dict[int, int] = {}
    tried = 0
    for position, distance in zip(positions.tolist(), distances.tolist()):
        boundary = walk.boundary(position)
        if rejected.get(boundary, boundary) <= position:
            continue
        tried += 1
        run = walk.extend(level, position, distance, pending)
        candidate = domain.fitness(run.level)
        if not cfg.fitness_guard or candidate >= fitness:
            return run, candidate
        rejected[boundary] = min(position, rejected.get(boundary, boundary))
        if tried > cfg.max_retries:
            break
    return None, fitness


def generate_level(index: NeighbourIndex, dataset: PolicyDataset, domain: DomainPlugin, cfg: PolicyConfig,
                   rng: np.random.Generator) -> GenerationResult:
    """
    Drive random levels towards acceptability with the policy.

    Each attempt starts from domain.random_level(rng) and makes up to
    max_steps policy queries, checking fitness after each one, until the
    level is acceptable. An attempt also ends once no dataset position is
    open. A fresh random level is drawn on every restart.

    Args:
        index: Neighbour index over dataset
        dataset: Policy dataset
        domain: Domain supplying random levels and fitness
        cfg: Policy settings
        rng: Random generator for start levels

    Returns:
        GenerationResult holding an acceptable level

    Raises:
        GenerationFailedError: After 1 + max_restarts unsuccessful attempts
    """
    started = time.perf_counter()
    queries = applied = 0
    best = -math.inf
    walk = PolicyWalk(dataset, cfg)

    def accept(level: Level, fitness: float, attempt: int) -> GenerationResult:
        return GenerationResult(level=level, attempts=attempt, policy_queries=queries, actions_applied=applied,
                                wall_clock_seconds=time.perf_counter() - started, fitness=fitness)

    attempts = cfg.max_restarts + 1
    for attempt in range(1, attempts + 1):
        level = domain.random_level(rng)
        fitness = domain.fitness(level)
        best = max(best, fitness)
        if fitness >= cfg.fitness_threshold:
            return accept(level, fitness, attempt)
        walk.reset()
        for step in range(cfg.max_steps):
            outcome = _guarded_step(index, walk, domain, level, fitness, cfg)
            if outcome is None:
                logger.debug("Attempt %d ran out of open dataset positions after %d queries", attempt, step)
                break
            queries += 1
            run, fitness = outcome
            if run is None:
                continue
            applied += run.actions_applied
            level = run.level
            best = max(best, fitness)
            if fitness >= cfg.fitness_threshold:
                return accept(level, fitness, attempt)
        logger.debug("Attempt %d ended without an acceptable level (fitness %.4f); restarting", attempt, fitness)

    elapsed = time.perf_counter() - started
    logger.warning("Policy gave up after %d attempts, best fitness %.4f", attempts, best)
    raise GenerationFailedError(attempts=attempts, best_fitness=best, policy_queries=queries,
                                wall_clock_seconds=elapsed)


@dataclass(frozen=True)
class NoveltyReport:
    """How far generated levels lie from the training end levels."""
    identical_fraction: float
    min_distances: List[int]

    def to_dict(self) -> dict:
        return {'identical_fraction': self.identical_fraction, 'min_distances': list(self.min_distances)}


def novelty_report(generated: Sequence[Level], training_finals: Sequence[Level]) -> NoveltyReport:
    """
    Fraction of generated levels that copy a training end level cell for cell,
    plus each generated level's hamming distance to its closest training level.
    """
    if not generated or not training_finals:
        return NoveltyReport(0.0, [])
    distances = [min(hamming_distance(level, final) for final in training_finals) for level in generated]
    identical = sum(1 for distance in distances if distance == 0)
    return NoveltyReport(identical / len(generated), distances)
