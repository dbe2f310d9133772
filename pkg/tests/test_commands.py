import io
import json
import tempfile
from contextlib import redirect_stderr
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from hypocal.cli import run_cli
from hypocal.services.element_tests import TRAJECTORY_COLUMNS
from tests.factories import write_synthetic_config

TINY_GA = 'n_individuals = 16\nn_iterations = 1\nseed = 4'


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.out = self.tmp / 'out'

    def tearDown(self):
        self._tmp.cleanup()

    def call(self, *args, **options) -> str:
        stdout = io.StringIO()
        call_command(*args, stdout=stdout, **options)
        return stdout.getvalue()


class SimulateCommandTest(CommandTestCase):
    def test_writes_one_curve_per_test(self):
        """Test a curve table is written for each configured test."""
        config = write_synthetic_config(self.tmp, n_step=10, with_data=False)
        output = self.call('simulate', config=str(config), out=str(self.out))
        self.assertIn('Simulation completed', output)
        frame = pd.read_csv(self.out / 'TxD1.csv')
        self.assertEqual(list(frame.columns), TRAJECTORY_COLUMNS)
        self.assertEqual(len(frame), 11)
        self.assertTrue((self.out / 'EDO1.csv').exists())

    def test_reproducible_curves(self):
        """Test that two runs write byte-identical curve files."""
        config = write_synthetic_config(self.tmp, n_step=50, with_data=False)
        self.call('simulate', config=str(config), out=str(self.tmp / 'a'))
        self.call('simulate', config=str(config), out=str(self.tmp / 'b'))
        names = sorted(path.name for path in (self.tmp / 'a').glob('*.csv'))
        self.assertEqual(names, ['EDO1.csv', 'TxD1.csv', 'TxD2.csv', 'TxD3.csv'])
        for name in names:
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_missing_params(self):
        """Test exit code 3 when [params] is absent."""
        config = self.tmp / 'run.ini'
        config.write_text('[test:tx]\nkind = triaxial\nT1 = -100\nT2 = -100\ne = 0.6\neps_fin = 0.2\n')
        with self.assertRaises(CommandError) as ctx:
            self.call('simulate', config=str(config), out=str(self.out))
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertTrue(str(ctx.exception).startswith('error=ConfigurationError'))


class ValidateCommandTest(CommandTestCase):
    def test_reference_checks(self):
        """Test the validation report without a configuration file."""
        self.call('validate', out=str(self.out))
        report = json.loads((self.out / 'validation.json').read_text())
        self.assertEqual(report['mode'], 'validate')
        self.assertAlmostEqual(report['parameters']['phi_c_deg'], 33.0, places=9)
        for orders in report['convergence']['validation_triaxial'].values():
            self.assertTrue(all(order >= 0.9 for order in orders))
        self.assertLessEqual(report['max_T2_drift'], 1e-3)
        self.assertTrue((self.out / 'validation_oedometer.csv').exists())


class SynthesizeCommandTest(CommandTestCase):
    def test_writes_sampled_curves_to_data_paths(self):
        """Test curves land where the configuration expects its data."""
        config = write_synthetic_config(self.tmp, n_step=20)
        (self.tmp / 'data' / 'EDO1.csv').unlink()
        self.call('synthesize', config=str(config), out=str(self.out), oedometer_points=6, triaxial_points=4)
        self.assertEqual(len(pd.read_csv(self.tmp / 'data' / 'EDO1.csv')), 6)
        self.assertEqual(len(pd.read_csv(self.tmp / 'data' / 'TxD2.csv')), 4)


class CalibrateCommandTest(CommandTestCase):
    def test_tiny_calibration(self):
        """Test reports, history and best-fit curves of a short run."""
        config = write_synthetic_config(self.tmp, n_step=20, ga=TINY_GA)
        output = self.call('calibrate', config=str(config), out=str(self.out))
        self.assertIn('Calibration completed', output)
        for name in ('report.txt', 'report.json', 'history.csv', 'TxD3.csv', 'EDO1.csv'):
            self.assertTrue((self.out / name).exists(), name)
        report = json.loads((self.out / 'report.json').read_text())
        self.assertEqual(report['seed'], 4)
        self.assertEqual(set(report['deltas']), {'oedometer', 'deviatoric', 'volumetric'})

    def test_seed_flag_overrides_config(self):
        """Test that --seed takes precedence over the file."""
        config = write_synthetic_config(self.tmp, n_step=20, ga=TINY_GA)
        self.call('calibrate', config=str(config), out=str(self.out), seed=99)
        self.assertEqual(json.loads((self.out / 'report.json').read_text())['seed'], 99)

    def test_reproducible_reports(self):
        """Test that two runs with one seed write identical reports."""
        config = write_synthetic_config(self.tmp, n_step=20, ga=TINY_GA)
        self.call('calibrate', config=str(config), out=str(self.tmp / 'a'))
        self.call('calibrate', config=str(config), out=str(self.tmp / 'b'))
        for name in ('report.json', 'report.txt', 'history.csv'):
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_missing_data_file(self):
        """Test exit code 3 for an absent curve file."""
        config = write_synthetic_config(self.tmp, n_step=20, ga=TINY_GA)
        (self.tmp / 'data' / 'TxD1.csv').unlink()
        with self.assertRaises(CommandError) as ctx:
            self.call('calibrate', config=str(config), out=str(self.out))
        self.assertEqual(ctx.exception.returncode, 3)
        self.assertIn('TxD1.csv', str(ctx.exception))


class EnsembleCommandTest(CommandTestCase):
    def test_two_trials(self):
        """Test the ensemble tables of a two-trial run."""
        config = write_synthetic_config(self.tmp, n_step=20, ga=TINY_GA)
        self.call('ensemble', config=str(config), out=str(self.out), trials=2)
        trials = pd.read_csv(self.out / 'trials.csv')
        self.assertEqual(trials['seed'].tolist(), [4, 5])
        self.assertEqual(len(pd.read_csv(self.out / 'cost_envelope.csv')), 2)
        self.assertEqual(json.loads((self.out / 'ensemble.json').read_text())['n_trials'], 2)


class RunCliTest(SimpleTestCase):
    def test_unknown_mode(self):
        """Test exit code 2 and the usage line for an unknown verb."""
        stderr = io.StringIO()
        with redirect_stderr(stderr):
            self.assertEqual(run_cli(['bogus']), 2)
        self.assertIn("error=UsageError unknown mode 'bogus'", stderr.getvalue())

    def test_no_mode(self):
        """Test exit code 2 without arguments."""
        with redirect_stderr(io.StringIO()):
            self.assertEqual(run_cli([]), 2)

    def test_missing_config_flag(self):
        """Test exit code 2 when a required option is missing."""
        with redirect_stderr(io.StringIO()):
            self.assertEqual(run_cli(['calibrate']), 2)

    def test_data_error_exit_code(self):
        """Test exit code 3 for an unreadable configuration."""
        with tempfile.TemporaryDirectory() as tmp, redirect_stderr(io.StringIO()):
            self.assertEqual(run_cli(['simulate', '--config', str(Path(tmp) / 'absent.ini')]), 3)
