"""
Tests for dataset construction from GA runs
"""

import unittest

import numpy as np

from src.models.dataset import PolicyDataset
from src.models.errors import DatasetError
from src.models.genetics import GaRunResult
from src.models.level import Action, Level, apply_action, hamming_distance
from src.services.distillation import build_dataset, pair_levels, replay_trajectory
from src.services.maze_domain import MAZE_ALPHABET, MazeConfig, random_maze
from src.services.platformer_domain import PlatformerConfig, random_platformer_level


def make_run(initial, final):
    return GaRunResult(initial_levels=list(initial), final_levels=list(final), generations_used=1,
                       wall_clock_seconds=0.0, seed=0)


class TestPairLevels(unittest.TestCase):
    """Test cases for pairing start and end levels."""

    def setUp(self):
        """Set up test fixtures."""
        self.zero = Level([[0, 0], [0, 0]], MAZE_ALPHABET)
        self.one = Level([[0, 1], [0, 0]], MAZE_ALPHABET)
        self.full = Level([[1, 1], [1, 1]], MAZE_ALPHABET)

    def test_zip_by_index(self):
        """Test index pairing when counts match."""
        pairs = pair_levels([self.zero, self.full], [self.one, self.zero])
        self.assertEqual([p.end for p in pairs], [self.one, self.zero])

    def test_surplus_starts_use_nearest(self):
        """Test that extra start levels pair with the closest final level."""
        pairs = pair_levels([self.zero, self.full, self.one], [self.zero])
        self.assertEqual(len(pairs), 3)
        self.assertTrue(all(p.end == self.zero for p in pairs))

        pairs = pair_levels([self.zero, self.full], [self.one])
        self.assertEqual(pairs[1].end, self.one)

    def test_surplus_nearest_tie_takes_first(self):
        """Test the lowest final index on distance ties."""
        right = Level([[0, 1], [0, 0]], MAZE_ALPHABET)
        left = Level([[1, 0], [0, 0]], MAZE_ALPHABET)
        pairs = pair_levels([left, right, self.zero], [right, left])
        self.assertEqual(pairs[2].end, right)
        pairs = pair_levels([right, left, self.zero], [left, right])
        self.assertEqual(pairs[2].end, left)

    def test_empty_final(self):
        """Test that a run without final levels is rejected."""
        with self.assertRaises(DatasetError):
            pair_levels([self.zero], [])

    def test_shape_mismatch(self):
        """Test that mixed shapes are rejected."""
        with self.assertRaises(DatasetError):
            pair_levels([Level([[0, 0, 0]], MAZE_ALPHABET)], [self.zero])


class TestBuildDataset(unittest.TestCase):
    """Test cases for build_dataset."""

    def test_two_cell_example(self):
        """Test the pairs recorded for a 2x2 pair differing in two cells."""
        start = Level([[0, 0], [0, 0]], MAZE_ALPHABET)
        end = Level([[0, 1], [1, 0]], MAZE_ALPHABET)
        dataset = build_dataset(make_run([start], [end]))
        self.assertEqual(len(dataset), 2)
        self.assertEqual(dataset.trajectory_bounds, [(0, 2)])
        self.assertEqual(dataset.state(0), start)
        self.assertEqual(dataset.action(0), Action(1, 0, 1))
        self.assertEqual(dataset.state(1), Level([[0, 1], [0, 0]], MAZE_ALPHABET))
        self.assertEqual(dataset.action(1), Action(0, 1, 1))

    def test_identical_levels(self):
        """Test that an unchanged level contributes an empty trajectory."""
        start = Level([[0, 1], [0, 0]], MAZE_ALPHABET)
        dataset = build_dataset(make_run([start], [start]))
        self.assertEqual(len(dataset), 0)
        self.assertEqual(dataset.trajectory_bounds, [(0, 0)])
        self.assertIsNone(replay_trajectory(dataset, 0))

    def test_sequential_consistency_and_replay(self):
        """Test that each state follows from the previous one and trajectories replay to the end level."""
        rng = np.random.default_rng(0)
        cfg = MazeConfig(10)
        initial = [random_maze(cfg, rng) for _ in range(8)]
        final = [random_maze(cfg, rng) for _ in range(5)]
        run = make_run(initial, final)
        dataset = build_dataset(run)
        pairs = pair_levels(initial, final)

        self.assertEqual(dataset.trajectory_count, 8)
        self.assertEqual(len(dataset), sum(hamming_distance(p.start, p.end) for p in pairs))
        for t, ((start, end), pair) in enumerate(zip(dataset.trajectory_bounds, pairs)):
            self.assertEqual(dataset.delta_lengths[t], end - start)
            for i in range(start, end - 1):
                self.assertEqual(apply_action(dataset.state(i), dataset.action(i)), dataset.state(i + 1))
                self.assertEqual(dataset.trajectory_of(i), t)
            if end > start:
                self.assertEqual(dataset.state(start), pair.start)
                self.assertEqual(replay_trajectory(dataset, t), pair.end)

    def test_threads_keep_order(self):
        """Test that worker threads produce the same dataset."""
        rng = np.random.default_rng(1)
        cfg = PlatformerConfig(width=20, height=6)
        levels = [random_platformer_level(cfg, rng) for _ in range(6)]
        run = make_run(levels[:3], levels[3:])
        serial = build_dataset(run)
        threaded = build_dataset(run, workers=3)
        np.testing.assert_array_equal(serial.states, threaded.states)
        np.testing.assert_array_equal(serial.actions, threaded.actions)
        self.assertEqual(serial.trajectory_bounds, threaded.trajectory_bounds)


class TestDatasetText(unittest.TestCase):
    """Test cases for the dataset file format."""

    def setUp(self):
        """Set up test fixtures."""
        rng = np.random.default_rng(2)
        cfg = PlatformerConfig(width=12, height=5)
        levels = [random_platformer_level(cfg, rng) for _ in range(4)]
        self.dataset = build_dataset(make_run(levels[:2] + [levels[2]], [levels[3], levels[3], levels[2]]))

    def test_lossless(self):
        """Test that the text format preserves every pair and boundary."""
        loaded = PolicyDataset.from_text(self.dataset.to_text())
        np.testing.assert_array_equal(loaded.states, self.dataset.states)
        np.testing.assert_array_equal(loaded.actions, self.dataset.actions)
        self.assertEqual(loaded.trajectory_bounds, self.dataset.trajectory_bounds)
        self.assertEqual(loaded.delta_lengths, self.dataset.delta_lengths)
        self.assertEqual(loaded.alphabet, self.dataset.alphabet)
        self.assertEqual(loaded.trajectory_bounds[-1][0], loaded.trajectory_bounds[-1][1])

    def test_header(self):
        """Test the first two lines."""
        lines = self.dataset.to_text().split("\n")
        self.assertEqual(lines[0], "PCGDATA v1 12 5 alphabet=-XEoP")
        self.assertEqual(lines[1], f"trajectories 3 pairs {len(self.dataset)}")

    def test_corrupt_files(self):
        """Test that damaged files raise DatasetError."""
        text = self.dataset.to_text()
        lines = text.split("\n")
        corrupt = [
            text.replace("PCGDATA", "PCGDATB", 1),
            "\n".join(lines[:-3]) + "\n",
            text.replace(f"pairs {len(self.dataset)}", f"pairs {len(self.dataset) + 1}"),
            "\n".join(lines[:3] + [lines[3].replace(lines[3][0], "#", 1)] + lines[4:]),
            "",
        ]
        for bad in corrupt:
            with self.assertRaises(DatasetError):
                PolicyDataset.from_text(bad)

    def test_rejects_gapped_bounds(self):
        """Test that non-contiguous trajectories are rejected."""
        with self.assertRaises(DatasetError):
            PolicyDataset(2, 1, MAZE_ALPHABET, np.zeros((2, 2)), np.zeros((2, 3)), [(0, 1), (2, 2)], [1, 0])
