"""
Turn an evolution run into a behaviour-cloning dataset.

Each start level is walked towards its evolved end level one tile change at a
time; every intermediate state is recorded together with the change applied
to it.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.models.dataset import PolicyDataset, TrajectoryPair
from src.models.errors import DatasetError
from src.models.genetics import GaRunResult
from src.models.level import Level, apply_action, compute_diffs, hamming_distance

logger = logging.getLogger(__name__)


def pair_levels(initial: Sequence[Level], final: Sequence[Level]) -> List[TrajectoryPair]:
    """
    Pair start levels with end levels.

    Levels are zipped index by index. Start levels left over when fewer
    final levels exist are paired with the final level closest in hamming
    distance (lowest index on ties). Final levels beyond the number of start
    levels are unused.

    Raises:
        DatasetError: If final is empty or any two levels differ in shape
    """
    if not final:
        raise DatasetError("the run has no final levels to learn from")
    shape = final[0].shape
    for level in list(initial) + list(final):
        if level.shape != shape:
            raise DatasetError(f"level shapes differ: {level.shape} vs {shape}")

    pairs = []
    for i, start in enumerate(initial):
        if i < len(final):
            end = final[i]
        else:
            distances = [hamming_distance(start, candidate) for candidate in final]
            end = final[int(np.argmin(distances))]
        pairs.append(TrajectoryPair(start=start, end=end, delta=compute_diffs(start, end)))
    return pairs


def _replay(pair: TrajectoryPair) -> Tuple[np.ndarray, np.ndarray]:
    cells = pair.start.width * pair.start.height
    states = np.empty((len(pair.delta), cells), dtype=np.uint8)
    actions = np.empty((len(pair.delta), 3), dtype=np.int64)
    state = pair.start
    for row, action in enumerate(pair.delta):
        states[row] = state.flat()
        actions[row] = (action.x, action.y, action.t)
        state = apply_action(state, action)
    if state != pair.end:
        raise DatasetError("replaying the change set did not reach the end level")
    return states, actions


def build_dataset(run: GaRunResult, workers: int = 1) -> PolicyDataset:
    """
    Build the (state, action) dataset for a finished GA run.

    Args:
        run: GA result holding initial and final levels
        workers: Threads used to replay trajectories; output order is fixed

    Returns:
        PolicyDataset with one trajectory per start level

    Raises:
        DatasetError: On empty final levels or mismatched shapes
    """
    pairs = pair_levels(run.initial_levels, run.final_levels)
    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            replays = list(pool.map(_replay, pairs))
    else:
        replays = [_replay(pair) for pair in pairs]

    bounds, lengths, cursor = [], [], 0
    for states, _ in replays:
        bounds.append((cursor, cursor + len(states)))
        lengths.append(len(states))
        cursor += len(states)

    first = run.final_levels[0]
    cells = first.width * first.height
    dataset = PolicyDataset(
        width=first.width,
        height=first.height,
        alphabet=first.alphabet,
        states=np.concatenate([s for s, _ in replays]) if cursor else np.empty((0, cells), dtype=np.uint8),
        actions=np.concatenate([a for _, a in replays]) if cursor else np.empty((0, 3), dtype=np.int64),
        trajectory_bounds=bounds,
        delta_lengths=lengths
    )
    logger.info("Built dataset: %d trajectories, %d state-action pairs", dataset.trajectory_count, len(dataset))
    return dataset


def replay_trajectory(dataset: PolicyDataset, trajectory: int) -> Optional[Level]:
    """
    Level reached by applying every recorded action of a trajectory to its first state.

    Returns:
        The reconstructed end level, or None for a trajectory with no changes
    """
    start, end = dataset.trajectory_bounds[trajectory]
    if start == end:
        return None
    level = dataset.state(start)
    for index in range(start, end):
        level = apply_action(level, dataset.action(index))
    return level
