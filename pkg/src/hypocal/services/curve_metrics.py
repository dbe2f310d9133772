"""Dimensionless curve scaling and the point-to-polyline calibration cost."""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, ValidationError, model_validator

from ..exceptions import DatasetValidationError, DegenerateNormalizer, NonUniqueRootError, SimulationRejected
from .element_tests import OEDOMETER_COLUMNS, TRIAXIAL_COLUMNS, TestKind, TestSpec, Trajectory, simulate
from .hypoplasticity import HypoParams, SearchParams

logger = logging.getLogger(__name__)


class Plane(str, Enum):
    OEDOMETER = 'oedometer'
    DEVIATORIC = 'deviatoric'
    VOLUMETRIC = 'volumetric'


PLANES_BY_KIND = {
    TestKind.OEDOMETER: (Plane.OEDOMETER,),
    TestKind.TRIAXIAL: (Plane.DEVIATORIC, Plane.VOLUMETRIC),
}


class CostWeights(BaseModel):
    """Relative importance of the oedometer, deviatoric and volumetric planes."""

    model_config = ConfigDict(frozen=True)

    w1: NonNegativeFloat = 1.0
    w2: NonNegativeFloat = 1.0
    w3: NonNegativeFloat = 1.0

    @model_validator(mode='after')
    def _check_any_positive(self) -> 'CostWeights':
        if self.w1 == self.w2 == self.w3 == 0.0:
            raise ValueError("at least one cost weight must be positive")
        return self

    def for_plane(self, plane: Plane) -> float:
        return {Plane.OEDOMETER: self.w1, Plane.DEVIATORIC: self.w2, Plane.VOLUMETRIC: self.w3}[plane]


@dataclass(frozen=True)
class ExperimentalTest:
    """Measured curves of one element test.

    Oedometer curves hold the columns ``T1_kPa, e``; triaxial curves hold
    ``eps_a, q_kPa, eps_v``. Stresses are signed (compression negative).
    """

    spec: TestSpec
    curves: pd.DataFrame
    source: str = ''

    def __post_init__(self):
        source = self.source or self.spec.label
        columns = OEDOMETER_COLUMNS if self.spec.kind is TestKind.OEDOMETER else TRIAXIAL_COLUMNS
        missing = [c for c in columns if c not in self.curves.columns]
        if missing:
            raise DatasetValidationError(source, f"missing columns {missing}")
        if len(self.curves) < 2:
            raise DatasetValidationError(source, "at least 2 points are required")
        if len(self.curves) > self.spec.n_step + 1:
            raise DatasetValidationError(
                source, f"{len(self.curves)} points exceed the {self.spec.n_step + 1} simulated samples"
            )
        if self.spec.kind is TestKind.TRIAXIAL and (np.diff(self.curves['eps_a'].to_numpy()) < 0).any():
            raise DatasetValidationError(source, "eps_a must be non-decreasing")

    @property
    def name(self) -> str:
        return self.spec.label


@dataclass(frozen=True)
class ExperimentalDataset:
    tests: tuple[ExperimentalTest, ...]

    def __post_init__(self):
        if not self.tests:
            raise DatasetValidationError('<dataset>', "no tests configured")

    def __iter__(self):
        return iter(self.tests)

    def __len__(self) -> int:
        return len(self.tests)

    def kinds(self) -> set[TestKind]:
        return {test.spec.kind for test in self.tests}


@dataclass(frozen=True)
class ScaledCurve:
    plane: Plane
    points: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


@dataclass(frozen=True)
class PlaneScaler:
    """Normalizers of one plane, all taken from the experimental curve.

    Oedometer abscissa: log strain ln((1+e0)/(1+e)) over its final experimental
    value. Oedometer ordinate: -T1 min-max scaled. Triaxial abscissa: eps_a / eps_fin.
    Triaxial ordinates: q or eps_v over the measured value of largest magnitude.
    """

    plane: Plane
    x_ref: float
    y_ref: float
    y_min: float = 0.0
    e0: float = 0.0

    def __call__(self, x_raw: np.ndarray, y_raw: np.ndarray) -> ScaledCurve:
        if self.plane is Plane.OEDOMETER:
            x = np.log((1.0 + self.e0) / (1.0 + x_raw)) / self.x_ref
        else:
            x = x_raw / self.x_ref
        y = (y_raw - self.y_min) / self.y_ref
        return ScaledCurve(plane=self.plane, points=np.column_stack([x, y]))


def _experimental_raw(test: ExperimentalTest, plane: Plane) -> tuple[np.ndarray, np.ndarray]:
    curves = test.curves
    if plane is Plane.OEDOMETER:
        return curves['e'].to_numpy(float), -curves['T1_kPa'].to_numpy(float)
    column = 'q_kPa' if plane is Plane.DEVIATORIC else 'eps_v'
    return curves['eps_a'].to_numpy(float), curves[column].to_numpy(float)


def _simulated_raw(trajectory: Trajectory, plane: Plane) -> tuple[np.ndarray, np.ndarray]:
    if plane is Plane.OEDOMETER:
        return trajectory.e, -trajectory.T1
    return trajectory.eps_a, trajectory.q if plane is Plane.DEVIATORIC else trajectory.eps_v


def plane_scaler(test: ExperimentalTest, plane: Plane) -> PlaneScaler:
    """Build the normalizers of ``plane`` from the measured curve.

    Raises:
        DegenerateNormalizer: A normalizer is zero or not finite.
    """
    x_raw, y_raw = _experimental_raw(test, plane)
    spec = test.spec

    def _degenerate(name: str) -> DegenerateNormalizer:
        return DegenerateNormalizer(test.name, plane.value, name)

    if plane is Plane.OEDOMETER:
        e0, e_fin = spec.initial.e, float(x_raw[-1])
        if not e0 > e_fin > -1.0:
            raise _degenerate('e_fin')
        x_ref = float(np.log((1.0 + e0) / (1.0 + e_fin)))
        y_min, y_max = float(y_raw.min()), float(y_raw.max())
        if not y_min > 0.0:
            raise _degenerate('min(-T1)')
        if not y_max > y_min:
            raise _degenerate('max(-T1)')
        return PlaneScaler(plane=plane, x_ref=x_ref, y_ref=y_max - y_min, y_min=y_min, e0=e0)

    if not (spec.eps_fin is not None and spec.eps_fin > 0.0):
        raise _degenerate('eps_fin')
    y_ref = float(y_raw[np.argmax(np.abs(y_raw))])
    if y_ref == 0.0 or not np.isfinite(y_ref):
        raise _degenerate('max(|q|)' if plane is Plane.DEVIATORIC else 'max(|eps_v|)')
    return PlaneScaler(plane=plane, x_ref=float(spec.eps_fin), y_ref=y_ref)


def scale_pair(
    test: ExperimentalTest, trajectory: Trajectory, plane: Plane
) -> tuple[ScaledCurve, ScaledCurve]:
    """Scale the measured and simulated curves of a test into one dimensionless plane."""
    scaler = plane_scaler(test, plane)
    return scaler(*_experimental_raw(test, plane)), scaler(*_simulated_raw(trajectory, plane))


def frechet_vector(points, polyline) -> np.ndarray:
    """Distance from each point to the nearest segment of the polyline.

    Args:
        points: (M, 2) scaled experimental points.
        polyline: (N, 2) scaled simulated vertices, N >= 1.

    Returns:
        (M,) array of point-to-segment distances with endpoint clamping.
    """
    points = np.asarray(points, dtype=float)
    polyline = np.asarray(polyline, dtype=float)
    if len(polyline) == 1:
        # zero-length test: the simulated curve is its initial state
        return np.linalg.norm(points - polyline[0], axis=1)
    start = polyline[:-1]
    segment = polyline[1:] - start
    length2 = np.einsum('ij,ij->i', segment, segment)

    offset = points[:, None, :] - start[None, :, :]
    with np.errstate(divide='ignore', invalid='ignore'):
        u = np.einsum('mjk,jk->mj', offset, segment) / length2
    u = np.clip(np.where(length2 > 0.0, u, 0.0), 0.0, 1.0)

    closest = start[None, :, :] + u[..., None] * segment[None, :, :]
    distances = np.linalg.norm(points[:, None, :] - closest, axis=-1)
    return distances.min(axis=1)


@dataclass(frozen=True)
class CostBreakdown:
    total: float
    deltas: dict[Plane, float] = field(default_factory=dict)


def _infeasible() -> CostBreakdown:
    return CostBreakdown(total=float('inf'), deltas={plane: float('inf') for plane in Plane})


class CostFunction:
    """Weighted sum of per-plane point-to-polyline norms.

    Experimental normalizers and scaled points are computed once; instances
    are picklable, so they can be shipped to worker processes.

    Args:
        data: Experimental dataset.
        weights: Plane weights.
        lambda_d, lambda_i: Fixed void-ratio ratios used when called with a
            raw parameter vector.
    """

    def __init__(
        self,
        data: ExperimentalDataset,
        weights: CostWeights | None = None,
        lambda_d: float | None = None,
        lambda_i: float | None = None,
    ):
        self.data = data
        self.weights = weights or CostWeights()
        self.lambda_d = lambda_d
        self.lambda_i = lambda_i
        self._planes = []
        for test in data:
            for plane in PLANES_BY_KIND[test.spec.kind]:
                scaler = plane_scaler(test, plane)
                experimental = scaler(*_experimental_raw(test, plane))
                self._planes.append((test, plane, scaler, experimental))

    def __call__(self, candidate) -> float:
        return self.breakdown(candidate).total

    def _expand(self, candidate) -> HypoParams:
        if isinstance(candidate, HypoParams):
            return candidate
        if isinstance(candidate, SearchParams):
            return candidate.expand()
        if self.lambda_d is None or self.lambda_i is None:
            raise TypeError("raw parameter vectors need lambda_d and lambda_i")
        return SearchParams.from_vector(candidate, self.lambda_d, self.lambda_i).expand()

    def breakdown(self, candidate) -> CostBreakdown:
        """Total cost and the per-plane norms for a parameter set.

        Args:
            candidate: ``HypoParams``, ``SearchParams`` or a six-entry vector.

        Returns:
            Breakdown with an infinite total if any test cannot be simulated.
        """
        try:
            params = self._expand(candidate)
        except ValidationError as e:
            logger.debug(f"Candidate outside the parameter domain: {e.error_count()} errors")
            return _infeasible()

        trajectories = {}
        for test in self.data:
            try:
                trajectories[id(test)] = simulate(test.spec, params)
            except (SimulationRejected, NonUniqueRootError) as e:
                logger.debug(f"Candidate rejected on {test.name}: {e}")
                return _infeasible()

        distances: dict[Plane, list[np.ndarray]] = {plane: [] for plane in Plane}
        for test, plane, scaler, experimental in self._planes:
            simulated = scaler(*_simulated_raw(trajectories[id(test)], plane))
            distances[plane].append(frechet_vector(experimental.points, simulated.points))

        deltas = {
            plane: float(np.linalg.norm(np.concatenate(parts))) if parts else 0.0
            for plane, parts in distances.items()
        }
        total = sum(self.weights.for_plane(plane) * delta for plane, delta in deltas.items())
        if not np.isfinite(total):
            return _infeasible()
        return CostBreakdown(total=float(total), deltas=deltas)


def cost(params: SearchParams, data: ExperimentalDataset, weights: CostWeights) -> float:
    """Calibration cost of a reduced parameter set (+inf if infeasible)."""
    return CostFunction(data, weights)(params)


def cost_of_params(params: HypoParams, data: ExperimentalDataset, weights: CostWeights) -> float:
    """Calibration cost of a full eight-parameter set, e.g. a published reference."""
    return CostFunction(data, weights)(params)
