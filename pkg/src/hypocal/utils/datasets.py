import io
import logging
import re
from pathlib import Path

import chardet
import numpy as np
import pandas as pd

from ..exceptions import DatasetValidationError, ParseError
from ..services.curve_metrics import ExperimentalDataset, ExperimentalTest
from ..services.element_tests import OEDOMETER_COLUMNS, TRIAXIAL_COLUMNS, TestKind, Trajectory
from .config_parser import TestEntry

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'


class CurveFileReader:
    """Reads measured curves from CSV files with a header row.

    Oedometer files carry ``T1_kPa,e``; triaxial files carry ``eps_a,q_kPa,eps_v``.
    """

    def __init__(self, stress_convention: str = 'signed'):
        self.stress_convention = stress_convention

    def read(self, path, kind: TestKind) -> pd.DataFrame:
        """
        Parse and sign-normalize one curve file.

        Args:
            path: CSV file
            kind: Test kind, which fixes the expected columns

        Returns:
            Numeric frame with signed stresses (compression negative)
        """
        path = Path(path)
        text = self._decode(path)
        if not text.strip():
            raise ParseError(path, 1, 'empty file')

        try:
            frame = pd.read_csv(io.StringIO(text), skipinitialspace=True)
        except pd.errors.ParserError as e:
            match = re.search(r'line (\d+)', str(e))
            raise ParseError(path, int(match.group(1)) if match else 1, 'malformed row') from e
        except pd.errors.EmptyDataError as e:
            raise ParseError(path, 1, 'empty file') from e

        frame.columns = [str(column).strip() for column in frame.columns]
        columns = OEDOMETER_COLUMNS if kind is TestKind.OEDOMETER else TRIAXIAL_COLUMNS
        missing = [column for column in columns if column not in frame.columns]
        if missing:
            raise ParseError(path, 1, f"missing columns {','.join(missing)}")

        frame = frame[columns]
        numeric = frame.apply(pd.to_numeric, errors='coerce')
        bad_rows = np.flatnonzero(numeric.isna().any(axis=1).to_numpy())
        if bad_rows.size:
            # Header is line 1
            raise ParseError(path, int(bad_rows[0]) + 2, 'non-numeric value')
        if len(numeric) == 0:
            raise ParseError(path, 2, 'no data rows')

        if kind is TestKind.OEDOMETER and self.stress_convention == 'magnitude':
            numeric['T1_kPa'] = -numeric['T1_kPa']
        self._check(path, numeric, kind)
        return numeric.astype(float)

    @staticmethod
    def _decode(path: Path) -> str:
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise ParseError(path, 1, e.strerror or 'unreadable file') from e
        encoding = chardet.detect(raw)['encoding'] or 'utf-8'
        try:
            return raw.decode(encoding)
        except (UnicodeDecodeError, LookupError) as e:
            raise ParseError(path, 1, f'cannot decode as {encoding}') from e

    @staticmethod
    def _check(path: Path, frame: pd.DataFrame, kind: TestKind):
        if kind is TestKind.OEDOMETER:
            if (frame['T1_kPa'] >= 0.0).any():
                raise DatasetValidationError(path, 'axial stress must be compressive')
            if (np.diff(frame['e'].to_numpy()) > 0.0).any():
                raise DatasetValidationError(path, 'void ratio increases along the load path')
        elif (np.diff(frame['eps_a'].to_numpy()) < 0.0).any():
            raise DatasetValidationError(path, 'eps_a must be non-decreasing')


def load_dataset(entries, stress_convention: str = 'signed') -> ExperimentalDataset:
    """
    Load the measured curves of every configured test.

    Args:
        entries: Iterable of ``TestEntry`` with data paths
        stress_convention: 'signed' or 'magnitude' for the stress columns

    Returns:
        Validated experimental dataset
    """
    reader = CurveFileReader(stress_convention)
    tests = []
    for entry in entries:
        entry: TestEntry
        if entry.data_path is None:
            raise DatasetValidationError(entry.spec.label, 'no data file configured')
        curves = reader.read(entry.data_path, entry.spec.kind)
        tests.append(ExperimentalTest(spec=entry.spec, curves=curves, source=str(entry.data_path)))
        logger.info(f"Loaded {len(curves)} points for {entry.spec.label} from {entry.data_path}")
    return ExperimentalDataset(tests=tuple(tests))


def write_frame(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def write_trajectory(trajectory: Trajectory, path) -> Path:
    """Write the plot-ready curve table of a simulated test."""
    return write_frame(trajectory.to_frame(), path)


def write_experimental(frame: pd.DataFrame, path, stress_convention: str = 'signed') -> Path:
    """Write measured-curve columns in the file convention used by ``CurveFileReader``."""
    frame = frame.copy()
    if 'T1_kPa' in frame.columns and stress_convention == 'magnitude':
        frame['T1_kPa'] = -frame['T1_kPa']
    return write_frame(frame, path)
