"""
Tests for artifact storage
"""

import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.models.errors import DatasetError, StorageError
from src.models.genetics import GaRunResult
from src.models.policy import PolicyConfig
from src.services.distillation import build_dataset
from src.services.maze_domain import MazeDomain
from src.services.platformer_domain import PlatformerDomain
from src.services.storage import (find_artifacts, load_levels, load_policy, load_run, save_levels, save_policy,
                                  save_run, write_config)


class TestStorage(unittest.TestCase):
    """Test cases for run, policy and level directories."""

    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.domain = MazeDomain(size=6)
        rng = np.random.default_rng(0)
        self.run = GaRunResult(
            initial_levels=[self.domain.random_level(rng) for _ in range(4)],
            final_levels=[self.domain.random_level(rng) for _ in range(2)],
            generations_used=3,
            wall_clock_seconds=0.25,
            seed=9,
            final_fitnesses=[1.0, 1.0],
            best_fitness_history=[0.5, 0.9, 1.0, 1.0],
            config=self.domain.ga_config(seed=9),
            domain='maze'
        )

    def tearDown(self):
        self.tmp.cleanup()

    def test_run_round_trip(self):
        """Test that a saved run loads back with its levels and domain."""
        run_dir = save_run(self.run, self.domain, self.root / 'run')
        loaded, domain = load_run(run_dir)
        self.assertEqual(loaded.initial_levels, self.run.initial_levels)
        self.assertEqual(loaded.final_levels, self.run.final_levels)
        self.assertEqual(loaded.config, self.run.config)
        self.assertEqual(loaded.best_fitness_history, self.run.best_fitness_history)
        self.assertEqual(domain.params(), self.domain.params())

    def test_run_missing_level(self):
        """Test that a deleted level file is reported."""
        run_dir = save_run(self.run, self.domain, self.root / 'run')
        (run_dir / 'final' / '001.lvl').unlink()
        with self.assertRaises(StorageError):
            load_run(run_dir)

    def test_run_corrupt_summary(self):
        """Test that run.json without required keys is reported."""
        run_dir = save_run(self.run, self.domain, self.root / 'run')
        (run_dir / 'run.json').write_text(json.dumps({'domain': 'maze'}))
        with self.assertRaises(StorageError):
            load_run(run_dir)

    def test_policy_round_trip(self):
        """Test that policy.json and its dataset load back."""
        dataset = build_dataset(self.run)
        policy = PolicyConfig(p=0.06, fitness_threshold=1.0, max_steps=10)
        path = save_policy(dataset, policy, self.domain, self.root / 'policy')
        loaded, loaded_policy, domain = load_policy(path)
        np.testing.assert_array_equal(loaded.states, dataset.states)
        self.assertEqual(loaded_policy, policy)
        self.assertEqual(domain.size, 6)

    def test_policy_alphabet_mismatch(self):
        """Test that a dataset from another domain is rejected."""
        dataset = build_dataset(self.run)
        policy = PolicyConfig(p=0.05, fitness_threshold=3.0)
        path = save_policy(dataset, policy, PlatformerDomain(), self.root / 'policy')
        with self.assertRaises(DatasetError):
            load_policy(path)

    def test_find_artifacts(self):
        """Test discovery of runs, level folders and bench results."""
        save_run(self.run, self.domain, self.root / 'run')
        save_levels(self.run.final_levels, self.root / 'generated')
        (self.root / 'bench').mkdir()
        (self.root / 'bench' / 'summary.csv').write_text("method\n")
        found = find_artifacts(self.root)
        self.assertEqual(found['runs'], [self.root / 'run'])
        self.assertEqual(found['levels'], [self.root / 'generated'])
        self.assertEqual(found['bench'], [self.root / 'bench'])
        self.assertEqual(find_artifacts(self.root / 'absent'), {'runs': [], 'levels': [], 'bench': []})

    def test_levels_and_config(self):
        """Test level folders and the resolved config file."""
        paths = save_levels(self.run.initial_levels, self.root / 'levels')
        self.assertEqual([p.name for p in paths], ['000.lvl', '001.lvl', '002.lvl', '003.lvl'])
        self.assertEqual(load_levels(self.root / 'levels', self.domain.alphabet), self.run.initial_levels)
        with self.assertRaises(StorageError):
            load_levels(self.root / 'absent', self.domain.alphabet)
        path = write_config({'seed': 9, 'size': [6]}, self.root)
        self.assertEqual(path.read_text(encoding='utf-8'), "seed: 9\nsize:\n- 6\n")
