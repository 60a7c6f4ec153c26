"""
Tests for the platformer domain and its scripted agent
"""

import unittest

import numpy as np

from src.models.errors import ConfigError
from src.models.level import Action, Level, apply_action
from src.services.platformer_domain import (AIR, ENEMY, PLATFORMER_ALPHABET, POWER_UP, SOLID, PlatformerConfig,
                                            PlatformerDomain, WinState, platformer_fitness,
                                            random_platformer_level, simulate_agent)

WIDTH, HEIGHT = 101, 16


def flat_cells():
    cells = np.full((HEIGHT, WIDTH), AIR, dtype=int)
    cells[-1, :] = SOLID
    return cells


class TestRandomPlatformerLevel(unittest.TestCase):
    """Test cases for random level generation."""

    def test_all_air(self):
        """Test that air_bias 1.0 leaves only the spawn platform."""
        level = random_platformer_level(PlatformerConfig(air_bias=1.0), np.random.default_rng(0))
        self.assertEqual(level.shape, (WIDTH, HEIGHT))
        self.assertEqual(level.count(AIR), WIDTH * HEIGHT - 2)
        self.assertEqual(level.tile(0, HEIGHT - 1), SOLID)
        self.assertEqual(level.tile(1, HEIGHT - 1), SOLID)

    def test_non_air_share(self):
        """Test that about a fifth of the cells are not air."""
        cfg = PlatformerConfig()
        counts = []
        for seed in range(100):
            level = random_platformer_level(cfg, np.random.default_rng(seed))
            self.assertEqual(level.shape, (WIDTH, HEIGHT))
            counts.append(WIDTH * HEIGHT - level.count(AIR))
        sigma = np.sqrt(WIDTH * HEIGHT * 0.2 * 0.8)
        self.assertLess(abs(np.mean(counts) - 0.2 * WIDTH * HEIGHT), 4 * sigma / 10 + 2)

    def test_bad_air_bias(self):
        """Test that air_bias outside (0, 1] is rejected."""
        with self.assertRaises(ConfigError):
            PlatformerConfig(air_bias=0.0)


class TestSimulateAgent(unittest.TestCase):
    """Test cases for the scripted agent."""

    def test_flat_level_wins(self):
        """Test an unobstructed run."""
        outcome = simulate_agent(Level(flat_cells(), PLATFORMER_ALPHABET))
        self.assertEqual(outcome.win_state, WinState.WIN)
        self.assertEqual(outcome.completion, 1.0)
        self.assertEqual(outcome.power_up_collected, 0)

    def test_high_wall_loses_halfway(self):
        """Test that a six-tile wall at column 50 stops the agent."""
        cells = flat_cells()
        cells[HEIGHT - 6:, 50] = SOLID
        outcome = simulate_agent(Level(cells, PLATFORMER_ALPHABET))
        self.assertEqual(outcome.win_state, WinState.LOSS)
        self.assertEqual(outcome.columns_traversed, 50)
        self.assertAlmostEqual(outcome.completion, 50 / 101)

    def test_low_wall_is_climbed(self):
        """Test that a step of four tiles is climbed."""
        cells = flat_cells()
        cells[HEIGHT - 5:, 50] = SOLID
        self.assertEqual(simulate_agent(Level(cells, PLATFORMER_ALPHABET)).win_state, WinState.WIN)

    def test_gap_limit(self):
        """Test that three floorless columns are jumped but four are not."""
        cells = flat_cells()
        cells[-1, 30:33] = AIR
        self.assertEqual(simulate_agent(Level(cells, PLATFORMER_ALPHABET)).win_state, WinState.WIN)
        cells[-1, 33] = AIR
        outcome = simulate_agent(Level(cells, PLATFORMER_ALPHABET))
        self.assertEqual(outcome.win_state, WinState.LOSS)
        self.assertEqual(outcome.columns_traversed, 30)

    def test_enemy_ends_run(self):
        """Test that standing next to an enemy loses."""
        cells = flat_cells()
        cells[HEIGHT - 2, 10] = ENEMY
        outcome = simulate_agent(Level(cells, PLATFORMER_ALPHABET))
        self.assertEqual(outcome.win_state, WinState.LOSS)
        self.assertEqual(outcome.columns_traversed, 10)

    def test_no_spawn(self):
        """Test that a column 0 without solid tiles is an instant loss."""
        cells = flat_cells()
        cells[-1, 0] = AIR
        outcome = simulate_agent(Level(cells, PLATFORMER_ALPHABET))
        self.assertEqual(outcome.win_state, WinState.LOSS)
        self.assertEqual(outcome.completion, 0.0)

    def test_deterministic(self):
        """Test that repeated calls give identical outcomes."""
        level = random_platformer_level(PlatformerConfig(), np.random.default_rng(9))
        first = simulate_agent(level)
        for _ in range(100):
            self.assertEqual(simulate_agent(level), first)


class TestPlatformerFitness(unittest.TestCase):
    """Test cases for the platformer fitness function."""

    def test_flat_win(self):
        """Test the winning total without power-ups."""
        self.assertAlmostEqual(platformer_fitness(Level(flat_cells(), PLATFORMER_ALPHABET)).total, 3.0)

    def test_half_loss(self):
        """Test a loss at column 50, and that removing the wall raises the total."""
        cells = flat_cells()
        cells[HEIGHT - 6:, 50] = SOLID
        blocked = platformer_fitness(Level(cells, PLATFORMER_ALPHABET))
        self.assertAlmostEqual(blocked.total, 0.4 + 2 * 50 / 101)
        self.assertAlmostEqual(blocked.total, 1.390, places=3)
        cells[HEIGHT - 6:HEIGHT - 1, 50] = AIR
        self.assertGreater(platformer_fitness(Level(cells, PLATFORMER_ALPHABET)).total, blocked.total)

    def test_wall_removal_never_lowers_total(self):
        """Test that clearing the blocking wall cell by cell from the top only raises the total."""
        cells = flat_cells()
        cells[HEIGHT - 6:, 50] = SOLID
        blocked = platformer_fitness(Level(cells, PLATFORMER_ALPHABET)).total
        level = Level(cells, PLATFORMER_ALPHABET)
        totals = [blocked]
        for row in range(HEIGHT - 6, HEIGHT - 1):
            level = apply_action(level, Action(50, row, AIR))
            totals.append(platformer_fitness(level).total)
        self.assertEqual(totals, sorted(totals))
        self.assertGreater(totals[1], blocked)
        self.assertAlmostEqual(totals[-1], 3.0)

    def test_power_up(self):
        """Test that a collected power-up adds 0.5."""
        cells = flat_cells()
        cells[HEIGHT - 2, 20] = POWER_UP
        breakdown = platformer_fitness(Level(cells, PLATFORMER_ALPHABET))
        self.assertEqual(breakdown.mario_state, 1)
        self.assertAlmostEqual(breakdown.total, 3.5)

    def test_threshold_implies_win(self):
        """Test that the best non-winning total stays below 3.0."""
        best_loss = 0.4 + 2 * (100 / 101) + 0.5
        self.assertAlmostEqual(best_loss, 2.8802, places=4)
        self.assertLess(best_loss, PlatformerDomain().fitness_threshold)


class TestPlatformerDomain(unittest.TestCase):
    """Test cases for the platformer plugin."""

    def setUp(self):
        """Set up test fixtures."""
        self.domain = PlatformerDomain()
        self.rng = np.random.default_rng(6)

    def test_gene_round_trip(self):
        """Test that column genes decode back to the level."""
        level = self.domain.random_level(self.rng)
        gene = self.domain.gene_encode(level)
        self.assertEqual(len(gene), WIDTH)
        self.assertEqual(len(gene[0]), HEIGHT)
        self.assertEqual(self.domain.gene_decode(gene), level)

    def test_mutate_touches_one_column(self):
        """Test that mutation replaces a single column."""
        gene = self.domain.gene_encode(self.domain.random_level(self.rng))
        mutated = self.domain.mutate_unit(gene, 40, self.rng)
        changed = [i for i in range(WIDTH) if gene[i] != mutated[i]]
        self.assertTrue(set(changed) <= {40})
        spawn = self.domain.mutate_unit(gene, 0, self.rng)
        self.assertEqual(spawn[0][-1], SOLID)

    def test_params_rebuild(self):
        """Test that params() recreates an equivalent domain."""
        domain = PlatformerDomain(air_bias=0.9, width=30, height=8)
        copy = PlatformerDomain(**domain.params())
        self.assertEqual(copy.params(), domain.params())
        with self.assertRaises(ConfigError):
            copy.check_level(Level(flat_cells(), PLATFORMER_ALPHABET))
