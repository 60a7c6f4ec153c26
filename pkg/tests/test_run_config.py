"""
Tests for run configuration loading and merging
"""

import tempfile
import unittest
from pathlib import Path

import yaml

from src.models.errors import ConfigError
from src.models.run_config import RunConfig


class TestRunConfigLoading(unittest.TestCase):
    """Test cases for building RunConfig from files and mappings."""

    def setUp(self):
        """Set up test fixtures."""
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, text: str) -> Path:
        path = self.dir / "run.yaml"
        path.write_text(text, encoding='utf-8')
        return path

    def test_flag_style_keys(self):
        """Test that dashed and underscored keys are the same setting."""
        cfg = RunConfig.from_file(self._write("max-steps: 12\nmax_restarts: 3\ninclude-distill-cost: off\n"))
        self.assertEqual(cfg.max_steps, 12)
        self.assertEqual(cfg.max_restarts, 3)
        self.assertIs(cfg.include_distill_cost, False)

    def test_policy_guard_keys(self):
        """Test that the guard and end-level keys reach the policy config."""
        cfg = RunConfig.from_file(self._write("fitness-guard: off\nmax-retries: 4\nfollow_end_level: on\n"))
        policy = cfg.policy_config(RunConfig().create_domain())
        self.assertEqual((policy.fitness_guard, policy.max_retries, policy.follow_end_level), (False, 4, True))

    def test_list_values(self):
        """Test comma strings, YAML lists and scalars for list settings."""
        cfg = RunConfig.from_file(self._write("size: [10, 20]\nfraction: '0.5,1.0'\nlevels: 5\n"))
        self.assertEqual(cfg.size, [10, 20])
        self.assertEqual(cfg.fraction, [0.5, 1.0])
        self.assertEqual(cfg.levels, [5])

    def test_empty_file(self):
        """Test that an empty file means no settings."""
        self.assertEqual(RunConfig.from_file(self._write("")), RunConfig())

    def test_errors(self):
        """Test unknown keys, bad values, non-mappings and missing files."""
        for text in ("popsize: 10\n", "seed: abc\n", "- 1\n- 2\n", "parallel: maybe\n", "seed: [1, 2\n"):
            with self.assertRaises(ConfigError, msg=text):
                RunConfig.from_file(self._write(text))
        with self.assertRaises(ConfigError):
            RunConfig.from_file(self.dir / "missing.yaml")

    def test_precedence(self):
        """Test that later sources override earlier ones only where set."""
        base = RunConfig.from_mapping({'seed': 1, 'p': 0.1, 'domain': 'maze'})
        flags = RunConfig.from_mapping({'seed': '7', 'threshold': '0.9'}, source='command line')
        merged = base.merged(flags)
        self.assertEqual((merged.seed, merged.p, merged.threshold, merged.domain), (7, 0.1, 0.9, 'maze'))

    def test_single(self):
        """Test single-value access to list settings."""
        self.assertIsNone(RunConfig().single('levels'))
        self.assertEqual(RunConfig(levels=[4]).single('levels'), 4)
        with self.assertRaises(ConfigError):
            RunConfig(size=[10, 20]).single('size')


class TestRunConfigResolution(unittest.TestCase):
    """Test cases for turning RunConfig into engine settings."""

    def test_ga_and_policy_configs(self):
        """Test that overrides reach the GA and policy settings."""
        cfg = RunConfig(size=[12], fraction=[0.5], population_size=20, seed=4, p=0.1, max_steps=9,
                        threshold=0.95)
        domain = cfg.create_domain()
        self.assertEqual(domain.size, 12)
        ga = cfg.ga_config(domain)
        self.assertEqual((ga.population_size, ga.acceptable_fraction, ga.seed, ga.fitness_threshold),
                         (20, 0.5, 4, 0.95))
        self.assertEqual(ga.child_list_size, 20)
        policy = cfg.policy_config(domain)
        self.assertEqual((policy.p, policy.max_steps, policy.fitness_threshold), (0.1, 9, 0.95))

    def test_platformer_params(self):
        """Test that size maps to the platformer width."""
        domain = RunConfig(domain='platformer', size=[40], air_bias=0.9).create_domain()
        self.assertEqual(domain.params(), {'air_bias': 0.9, 'width': 40, 'height': 16})

    def test_resolved_round_trip(self):
        """Test that the resolved config written to disk loads back unchanged."""
        resolved = RunConfig(size=[12], seed=3).resolved()
        self.assertEqual(resolved.population_size, 50)
        self.assertEqual(resolved.crossover_points, 50)
        self.assertEqual(resolved.threshold, 1.0)
        self.assertEqual(resolved.p, 0.06)
        self.assertEqual(resolved.max_steps, 50)
        self.assertEqual(resolved.max_restarts, 25)
        self.assertEqual((resolved.fitness_guard, resolved.max_retries, resolved.follow_end_level), (True, 20, False))
        self.assertEqual(resolved.size, [12])
        self.assertEqual(resolved.seed, 3)
        text = yaml.safe_dump(resolved.to_dict())
        self.assertEqual(RunConfig.from_mapping(yaml.safe_load(text)), resolved)

    def test_resolved_platformer_defaults(self):
        """Test the platformer defaults in a resolved config."""
        resolved = RunConfig(domain='platformer').resolved()
        self.assertEqual((resolved.population_size, resolved.crossover_points), (100, 101))
        self.assertEqual((resolved.threshold, resolved.p), (3.0, 0.05))
        self.assertEqual(resolved.size, [101])
        self.assertEqual(resolved.air_bias, 0.8)
        self.assertIs(resolved.follow_end_level, True)

    def test_bench_plan(self):
        """Test the sweep built from list settings."""
        plan = RunConfig(size=[10, 20], fraction=[0.5], levels=[5], seeds=[0, 1],
                         include_distill_cost=False, max_iterations=30).bench_plan()
        self.assertEqual(plan.maze_sizes, (10, 20))
        self.assertEqual(plan.acceptable_fractions, (0.5,))
        self.assertEqual(plan.levels_required, (5,))
        self.assertEqual(plan.seeds, (0, 1))
        self.assertFalse(plan.include_distillation_cost)
        self.assertEqual(plan.ga_overrides['max_iterations'], 30)
        self.assertEqual(len(plan.cells()), 2)

    def test_bench_plan_platformer_width(self):
        """Test that the platformer sweep uses size as its width."""
        plan = RunConfig(domain='platformer', size=[30]).bench_plan()
        self.assertEqual(plan.sizes, (30,))
        self.assertEqual(plan.levels_required, (5, 10, 20))

    def test_resolved_bench(self):
        """Test that bench resolution lists every sweep axis."""
        resolved = RunConfig(size=[10, 20], seeds=[0]).resolved(bench=True)
        self.assertEqual(resolved.size, [10, 20])
        self.assertEqual(resolved.fraction, [0.5, 1.0])
        self.assertEqual(resolved.levels, [10, 50, 100])
        self.assertEqual(resolved.methods, ['ga', 'policy'])
        self.assertIs(resolved.include_distill_cost, True)
