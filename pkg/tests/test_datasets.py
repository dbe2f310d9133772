import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from hypocal.exceptions import ConfigurationError, DatasetValidationError, ParseError
from hypocal.services.curve_metrics import CostWeights, cost
from hypocal.services.element_tests import TestKind, simulate
from hypocal.services.hypoplasticity import REFERENCE_SOILS, SYNTHETIC_BENCHMARK
from hypocal.utils.config_parser import ConfigLoader
from hypocal.utils.datasets import CurveFileReader, load_dataset, write_trajectory
from tests.factories import SYNTHETIC_PARAMS, synthetic_specs, write_synthetic_config

CONFIG_DIR = Path(__file__).resolve().parents[1] / 'configs'


class _TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()

    def write(self, name: str, text: str, encoding: str = 'utf-8') -> Path:
        path = self.tmp / name
        path.write_text(text, encoding=encoding)
        return path


class ConfigLoaderTest(_TempDirMixin, SimpleTestCase):
    def test_synthetic_config(self):
        """Test tests, data paths and GA settings of a generated configuration."""
        path = write_synthetic_config(self.tmp, n_step=20, ga='n_individuals = 30\nn_iterations = 2\nseed = 12')
        config = ConfigLoader().load(path)

        self.assertEqual([entry.spec.name for entry in config.tests], ['TxD1', 'TxD2', 'TxD3', 'EDO1'])
        self.assertEqual(config.tests[0].data_path, self.tmp / 'data' / 'TxD1.csv')
        self.assertEqual(config.tests[3].spec.kind, TestKind.OEDOMETER)
        self.assertEqual(config.tests[3].spec.n_step, 20)
        self.assertEqual(config.params, SYNTHETIC_PARAMS)
        self.assertEqual(config.ga.n_individuals, 30)
        self.assertEqual(config.seed, 12)
        self.assertEqual(config.ga.seed, 12)
        config.require('calibrate')

    def test_seed_absent(self):
        """Test that an unset seed stays None for later resolution."""
        config = ConfigLoader().load(write_synthetic_config(self.tmp, n_step=20))
        self.assertIsNone(config.seed)

    def test_magnitude_convention(self):
        """Test positive stresses are negated under the magnitude convention."""
        path = self.write('run.ini', (
            '[run]\nstress_convention = magnitude\n'
            '[test:tx]\nkind = triaxial\nT1 = 300\nT2 = 300\ne = 0.66\neps_fin = 0.11\n'
        ))
        spec = ConfigLoader().load(path).tests[0].spec
        self.assertEqual((spec.initial.T1, spec.initial.T2), (-300.0, -300.0))

    def test_explicit_parameters(self):
        """Test eight explicit values with phi_c in degrees."""
        path = self.write('run.ini', (
            '[params]\nphi_c = 33\nh_s = 1e6\nn = 0.25\ne_d0 = 0.55\ne_c0 = 0.95\n'
            'e_i0 = 1.05\nalpha = 0.25\nbeta = 1.5\n'
        ))
        params = ConfigLoader().load(path).params
        self.assertAlmostEqual(params.phi_c_deg, 33.0, places=12)
        self.assertEqual(params.h_s, 1e6)

    def test_missing_parameter(self):
        """Test the error when a parameter is missing."""
        path = self.write('run.ini', '[params]\nphi_c = 33\nh_s = 1e6\n')
        with self.assertRaisesRegex(ConfigurationError, 'missing parameters'):
            ConfigLoader().load(path)

    def test_reversed_bounds(self):
        """Test the error for a lower bound above the upper bound."""
        path = self.write('run.ini', '[bounds]\nbeta = 2.0, 1.0\n')
        with self.assertRaisesRegex(ConfigurationError, r'\[bounds\]'):
            ConfigLoader().load(path)

    def test_unreachable_final_state(self):
        """Test the error for an oedometer e_fin above e0."""
        path = self.write('run.ini', '[test:edo]\nkind = oedometer\nT1 = -10\nT2 = -10\ne = 0.7\ne_fin = 0.8\n')
        with self.assertRaises(ConfigurationError):
            ConfigLoader().load(path)

    def test_missing_file(self):
        """Test the error for a config path that does not exist."""
        with self.assertRaises(ConfigurationError):
            ConfigLoader().load(self.tmp / 'absent.ini')

    def test_shipped_hochstetten_configs(self):
        """Test both Hochstetten configurations: 500 x 10 GA, five tests, W and H references."""
        for name in ('hochstetten.ini', 'hochstetten_surrogate.ini'):
            config = ConfigLoader().load(CONFIG_DIR / name)
            self.assertEqual((config.ga.n_individuals, config.ga.n_iterations), (500, 10), name)
            self.assertEqual([entry.spec.name for entry in config.tests], ['TxD1', 'TxD2', 'TxD3', 'EDO1', 'EDO2'])
            self.assertEqual(config.tests[3].spec.initial.T1, -25.0)
            self.assertEqual(config.references['W'], REFERENCE_SOILS['hochstetten_validation'])
            self.assertEqual(config.references['H'], REFERENCE_SOILS['hochstetten_sand'])
            config.require('calibrate')
        surrogate = ConfigLoader().load(CONFIG_DIR / 'hochstetten_surrogate.ini')
        self.assertAlmostEqual(surrogate.params.phi_c_deg, 32.73, places=9)
        self.assertEqual(surrogate.tests[0].data_path.parent.name, 'hochstetten_surrogate')

    def test_calibration_needs_both_kinds(self):
        """Test that calibration requires oedometer and triaxial tests."""
        path = self.write('run.ini', '[test:tx]\nkind = triaxial\nT1 = -100\nT2 = -100\ne = 0.6\neps_fin = 0.2\n')
        with self.assertRaises(ConfigurationError):
            ConfigLoader().load(path).require('calibrate')


class CurveFileReaderTest(_TempDirMixin, SimpleTestCase):
    def test_empty_file(self):
        """Test a parse error at line 1 for an empty file."""
        with self.assertRaises(ParseError) as ctx:
            CurveFileReader().read(self.write('empty.csv', ''), TestKind.TRIAXIAL)
        self.assertEqual(ctx.exception.line, 1)

    def test_non_numeric_value(self):
        """Test the reported line of a non-numeric cell."""
        path = self.write('tx.csv', 'eps_a,q_kPa,eps_v\n0,0,0\n0.1,abc,-0.01\n')
        with self.assertRaises(ParseError) as ctx:
            CurveFileReader().read(path, TestKind.TRIAXIAL)
        self.assertEqual(ctx.exception.line, 3)

    def test_missing_column(self):
        """Test the error for a file without the expected header."""
        path = self.write('edo.csv', 'T1_kPa,void\n-10,0.7\n')
        with self.assertRaisesRegex(ParseError, 'missing columns e'):
            CurveFileReader().read(path, TestKind.OEDOMETER)

    def test_increasing_void_ratio(self):
        """Test the validation error for swelling during loading."""
        path = self.write('edo.csv', 'T1_kPa,e\n-10,0.70\n-50,0.71\n')
        with self.assertRaises(DatasetValidationError):
            CurveFileReader().read(path, TestKind.OEDOMETER)

    def test_decreasing_axial_strain(self):
        """Test the validation error for unloading in axial strain."""
        path = self.write('tx.csv', 'eps_a,q_kPa,eps_v\n0,0,0\n0.1,50,-0.01\n0.05,60,-0.02\n')
        with self.assertRaises(DatasetValidationError):
            CurveFileReader().read(path, TestKind.TRIAXIAL)

    def test_magnitude_stresses(self):
        """Test positive oedometer stresses are negated under the magnitude convention."""
        path = self.write('edo.csv', 'T1_kPa,e\n10,0.70\n50,0.69\n')
        frame = CurveFileReader('magnitude').read(path, TestKind.OEDOMETER)
        self.assertEqual(frame['T1_kPa'].tolist(), [-10.0, -50.0])

    def test_utf16_file(self):
        """Test that a UTF-16 encoded file is decoded."""
        path = self.write('edo.csv', 'T1_kPa,e\n-10,0.70\n-50,0.69\n-90,0.68\n', encoding='utf-16')
        frame = CurveFileReader().read(path, TestKind.OEDOMETER)
        self.assertEqual(frame['e'].tolist(), [0.70, 0.69, 0.68])


class RoundTripTest(_TempDirMixin, SimpleTestCase):
    def test_written_trajectories_reload_at_zero_cost(self):
        """Test that written simulated curves reload as a dataset with near-zero cost."""
        path = write_synthetic_config(self.tmp, n_step=100, with_data=False)
        config = ConfigLoader().load(path)
        entries = []
        for entry in config.tests:
            path = self.tmp / 'sim' / f'{entry.spec.name}.csv'
            data_path = write_trajectory(simulate(entry.spec, SYNTHETIC_PARAMS), path)
            entries.append(replace(entry, data_path=data_path))

        dataset = load_dataset(entries)
        self.assertEqual(len(dataset.tests), len(synthetic_specs()))
        value = cost(SYNTHETIC_BENCHMARK, dataset, CostWeights())
        self.assertTrue(np.isfinite(value))
        self.assertLessEqual(value, 1e-8)

    def test_entry_without_data(self):
        """Test the error when a test has no data file."""
        config = ConfigLoader().load(write_synthetic_config(self.tmp, n_step=20, with_data=False))
        with self.assertRaises(DatasetValidationError):
            load_dataset(config.tests)
