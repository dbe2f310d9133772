from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from hypocal.exceptions import ConfigurationError, ZeroVarianceError
from hypocal.services.ensemble import fit_line, pearson, run_ensemble, summarize
from hypocal.services.genetic_algorithm import GaConfig
from hypocal.services.hypoplasticity import SEARCH_DISPLAY_NAMES
from tests.factories import InfeasibleCost, SphereCost, benchmark_vector


class PearsonTest(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(21)

    def test_duplicate_and_negated_columns(self):
        """Test r = 1 for a copied column and r = -1 for a negated one."""
        x = self.rng.normal(size=50)
        r = pearson(np.column_stack([x, x, -x]))
        self.assertAlmostEqual(r[0, 1], 1.0, places=12)
        self.assertAlmostEqual(r[0, 2], -1.0, places=12)
        np.testing.assert_array_equal(np.diag(r), 1.0)
        np.testing.assert_array_equal(r, r.T)

    def test_independent_columns(self):
        """Test near-zero correlation for independent samples."""
        r = pearson(self.rng.normal(size=(20000, 2)))
        self.assertLess(abs(r[0, 1]), 0.03)

    def test_affine_invariance(self):
        """Test invariance under positive affine maps of a column."""
        samples = self.rng.normal(size=(30, 3))
        scaled = samples.copy()
        scaled[:, 1] = 4.0 * scaled[:, 1] + 7.0
        np.testing.assert_allclose(pearson(scaled), pearson(samples), atol=1e-12)

    def test_zero_variance(self):
        """Test the error names the constant column."""
        samples = np.column_stack([self.rng.normal(size=10), np.full(10, 2.0)])
        with self.assertRaises(ZeroVarianceError) as ctx:
            pearson(samples)
        self.assertEqual(ctx.exception.column, 1)


class FitLineTest(SimpleTestCase):
    def test_exact_line(self):
        """Test recovery of slope and intercept from exact data."""
        x = np.linspace(0.0, 5.0, 11)
        line = fit_line(np.column_stack([x, 2.5 * x - 1.0]))
        self.assertAlmostEqual(line.slope, 2.5, places=12)
        self.assertAlmostEqual(line.intercept, -1.0, places=12)
        self.assertAlmostEqual(line.r, 1.0, places=12)

    def test_two_points(self):
        """Test the line through two points."""
        line = fit_line([[1.0, 1.0], [3.0, 5.0]])
        self.assertAlmostEqual(line.slope, 2.0, places=12)
        self.assertAlmostEqual(line.intercept, -1.0, places=12)

    def test_normal_equations(self):
        """Test the residuals are orthogonal to the design columns."""
        samples = np.random.default_rng(4).normal(size=(40, 2))
        line = fit_line(samples)
        residual = samples[:, 1] - (line.slope * samples[:, 0] + line.intercept)
        self.assertAlmostEqual(residual.sum(), 0.0, places=10)
        self.assertAlmostEqual((residual * samples[:, 0]).sum(), 0.0, places=10)

    def test_constant_x(self):
        """Test the error when x never varies."""
        with self.assertRaises(ZeroVarianceError):
            fit_line([[1.0, 2.0], [1.0, 3.0]])


class SummarizeTest(SimpleTestCase):
    def test_statistics(self):
        """Test the summary against direct computation."""
        frame = pd.DataFrame({'a': [1.0, 2.0, 4.0], 'b': [10.0, 10.5, 9.0]})
        summary = summarize(frame)
        self.assertEqual(list(summary.columns), ['mean', 'std', 'cv', 'min', 'max'])
        a = np.array([1.0, 2.0, 4.0])
        self.assertAlmostEqual(summary.loc['a', 'mean'], a.mean(), places=12)
        self.assertAlmostEqual(summary.loc['a', 'std'], a.std(ddof=1), places=12)
        self.assertAlmostEqual(summary.loc['a', 'cv'], a.std(ddof=1) / a.mean(), places=12)
        self.assertEqual(summary.loc['b', 'min'], 9.0)
        self.assertEqual(summary.loc['b', 'max'], 10.5)


class RunEnsembleTest(SimpleTestCase):
    def setUp(self):
        self.config = GaConfig(n_individuals=30, n_iterations=3, seed=5)
        self.cost = SphereCost(benchmark_vector(), self.config.lower, self.config.upper)

    def test_needs_two_trials(self):
        """Test the error for a single trial."""
        with self.assertRaises(ConfigurationError):
            run_ensemble(self.config, self.cost, n_trials=1)

    def test_consecutive_seeds(self):
        """Test trial k uses base_seed + k and summaries cover every parameter."""
        result = run_ensemble(self.config, self.cost, n_trials=3, base_seed=40)
        self.assertEqual([trial.seed for trial in result.trials], [40, 41, 42])
        self.assertEqual(result.n_trials, 3)
        self.assertEqual(list(result.summary.index), list(SEARCH_DISPLAY_NAMES))
        self.assertEqual(result.pearson.shape, (6, 6))
        table = result.trial_table()
        self.assertEqual(list(table.columns[:2]), ['seed', 'cost'])
        self.assertEqual(len(table), 3)
        self.assertEqual(len(result.cost_envelope), 4)
        self.assertTrue((result.cost_envelope['best_cost_min'] <= result.cost_envelope['best_cost_max']).all())

    def test_regressions_follow_threshold(self):
        """Test every reported regression has |r| >= 0.7."""
        result = run_ensemble(self.config, self.cost, n_trials=4)
        for regression in result.regressions:
            self.assertGreaterEqual(abs(result.pearson.loc[regression.x, regression.y]), 0.7)

    def test_identical_seeds(self):
        """Test identical trials give no correlation matrix."""
        result = run_ensemble(self.config, self.cost, n_trials=2, seeds=[7, 7])
        self.assertIsNone(result.pearson)
        self.assertEqual(result.regressions, [])
        self.assertTrue((result.summary['std'] == 0.0).all())

    def test_seed_count_mismatch(self):
        """Test the error when explicit seeds do not match n_trials."""
        with self.assertRaises(ConfigurationError):
            run_ensemble(self.config, self.cost, n_trials=3, seeds=[1, 2])

    def test_executor_matches_serial(self):
        """Test that trial-level parallelism does not change the results."""
        serial = run_ensemble(self.config, self.cost, n_trials=3)
        with ThreadPoolExecutor(max_workers=3) as executor:
            parallel = run_ensemble(self.config, self.cost, n_trials=3, executor=executor)
        pd.testing.assert_frame_equal(parallel.trial_table(), serial.trial_table())

    def test_infeasible_trials(self):
        """Test that infeasible trials are reported as failures."""
        result = run_ensemble(self.config, InfeasibleCost(), n_trials=2)
        self.assertEqual(result.trials, [])
        self.assertEqual([failure.seed for failure in result.failures], [5, 6])
        self.assertIsNone(result.pearson)
