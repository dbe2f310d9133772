"""Sand hypoplasticity constitutive law.

Parameters, element state, the semi-empirical coefficients (a, F, f_s, f_d),
Bauer's compression law for the limit void ratios, admissibility checks and
the general tensorial rate equation.

Sign convention: compression is negative. Angles are radians inside this
module; degrees only appear in ``HypoParams.from_degrees`` and ``phi_c_deg``.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..exceptions import DomainError, InadmissibleStateError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
SQRT6 = math.sqrt(6.0)

# Relative band within which Euler overshoot of e past e_d / e_i is clamped
ADMISSIBILITY_TOLERANCE = 1e-9
# Distance of T̂* from the nearest axisymmetric tensor below which F = 1
AXISYMMETRY_TOLERANCE = 1e-10

SEARCH_PARAMETER_NAMES = ('phi_c', 'h_s', 'n', 'e_c0', 'alpha', 'beta')
# Report and table column names, friction angle in degrees
SEARCH_DISPLAY_NAMES = ('phi_c_deg', 'h_s_kPa', 'n', 'e_c0', 'alpha', 'beta')


def to_display_units(vectors) -> np.ndarray:
    """Convert search vectors (rows ordered as ``SEARCH_PARAMETER_NAMES``) to display units."""
    display = np.array(vectors, dtype=float, copy=True)
    display[..., 0] = np.degrees(display[..., 0])
    return display


def from_display_units(vectors) -> np.ndarray:
    internal = np.array(vectors, dtype=float, copy=True)
    internal[..., 0] = np.radians(internal[..., 0])
    return internal


class HypoParams(BaseModel):
    """The eight material parameters of the sand hypoplasticity model.

    Args:
        phi_c: Critical friction angle (radians).
        h_s: Granular hardness (kPa).
        n: Barotropy exponent.
        e_d0, e_c0, e_i0: Minimal, critical and maximal void ratio at zero pressure.
        alpha: Pyknotropy exponent.
        beta: Stiffness exponent.
    """

    model_config = ConfigDict(frozen=True)

    phi_c: float
    h_s: float
    n: float
    e_d0: float
    e_c0: float
    e_i0: float
    alpha: float
    beta: float

    @model_validator(mode='after')
    def _check_ranges(self) -> 'HypoParams':
        if not 0.0 < self.phi_c < math.pi / 2:
            raise ValueError(f"phi_c must lie in (0, pi/2) radians, got {self.phi_c}")
        if not self.h_s > 0.0:
            raise ValueError(f"h_s must be positive, got {self.h_s}")
        if not 0.0 < self.n < 1.0:
            raise ValueError(f"n must lie in (0, 1), got {self.n}")
        if not 0.0 < self.e_d0 < self.e_c0 < self.e_i0:
            raise ValueError(
                f"void ratios must satisfy 0 < e_d0 < e_c0 < e_i0, "
                f"got {self.e_d0}, {self.e_c0}, {self.e_i0}"
            )
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError(f"alpha and beta must be positive, got {self.alpha}, {self.beta}")
        return self

    @classmethod
    def from_degrees(cls, phi_c: float, **kwargs: float) -> 'HypoParams':
        """Build a parameter set with the friction angle given in degrees."""
        return cls(phi_c=math.radians(phi_c), **kwargs)

    @property
    def phi_c_deg(self) -> float:
        return math.degrees(self.phi_c)

    @property
    def lambda_d(self) -> float:
        return self.e_d0 / self.e_c0

    @property
    def lambda_i(self) -> float:
        return self.e_i0 / self.e_c0


class SearchParams(BaseModel):
    """Reduced parameter set the optimizer acts on.

    ``e_d0`` and ``e_i0`` are not free: they follow e_c0 through the fixed
    ratios ``lambda_d`` and ``lambda_i``.
    """

    model_config = ConfigDict(frozen=True)

    phi_c: float
    h_s: float
    n: float
    e_c0: float
    alpha: float
    beta: float
    lambda_d: float
    lambda_i: float

    @model_validator(mode='after')
    def _check_ratios(self) -> 'SearchParams':
        if not 0.0 < self.lambda_d < 1.0 < self.lambda_i:
            raise ValueError(
                f"ratios must satisfy 0 < lambda_d < 1 < lambda_i, "
                f"got {self.lambda_d}, {self.lambda_i}"
            )
        return self

    def expand(self) -> HypoParams:
        """Full eight-parameter set (raises ``ValidationError`` if invalid)."""
        return HypoParams(
            phi_c=self.phi_c,
            h_s=self.h_s,
            n=self.n,
            e_d0=self.lambda_d * self.e_c0,
            e_c0=self.e_c0,
            e_i0=self.lambda_i * self.e_c0,
            alpha=self.alpha,
            beta=self.beta,
        )

    def to_vector(self) -> np.ndarray:
        """Free parameters ordered as ``SEARCH_PARAMETER_NAMES``."""
        return np.array([getattr(self, name) for name in SEARCH_PARAMETER_NAMES], dtype=float)

    @classmethod
    def from_vector(cls, vector, lambda_d: float, lambda_i: float) -> 'SearchParams':
        values = dict(zip(SEARCH_PARAMETER_NAMES, (float(v) for v in vector), strict=True))
        return cls(lambda_d=lambda_d, lambda_i=lambda_i, **values)


class ElementState(BaseModel):
    """Axisymmetric element state: axial stress, radial stress (kPa), void ratio."""

    model_config = ConfigDict(frozen=True)

    T1: float
    T2: float
    e: float

    @model_validator(mode='after')
    def _check_compressive(self) -> 'ElementState':
        if not self.trace < 0.0:
            raise ValueError(f"stress trace must be negative, got T1={self.T1}, T2={self.T2}")
        if not self.e > 0.0:
            raise ValueError(f"void ratio must be positive, got {self.e}")
        return self

    @property
    def trace(self) -> float:
        return self.T1 + 2.0 * self.T2

    @property
    def tensor(self) -> np.ndarray:
        return np.diag([self.T1, self.T2, self.T2])


class VoidLimits(BaseModel):
    """Pressure-dependent minimal, critical and maximal void ratios."""

    model_config = ConfigDict(frozen=True)

    e_d: float
    e_c: float
    e_i: float

    @model_validator(mode='after')
    def _check_order(self) -> 'VoidLimits':
        if not 0.0 < self.e_d < self.e_c < self.e_i:
            raise ValueError(f"limits out of order: {self.e_d}, {self.e_c}, {self.e_i}")
        return self


class GeneralRates(NamedTuple):
    T_dot: np.ndarray
    e_dot: float


def coeff_a(phi_c: float) -> float:
    """Matsuoka-Nakai coefficient a(φ_c)."""
    sin_phi = math.sin(phi_c)
    if sin_phi <= 0.0:
        raise DomainError(f"coeff_a requires sin(phi_c) > 0, got phi_c={phi_c}")
    return SQRT3 * (3.0 - sin_phi) / (2.0 * SQRT2 * sin_phi)


def bauer_factor(params: HypoParams, trT: float) -> float:
    """Common ratio e_i/e_i0 = e_c/e_c0 = e_d/e_d0 at stress trace ``trT``."""
    if trT > 0.0:
        raise DomainError(f"Bauer's law requires trT <= 0, got {trT}")
    return math.exp(-((-trT / params.h_s) ** params.n))


def void_limits(params: HypoParams, trT: float) -> VoidLimits:
    """Limit void ratios e_d, e_c, e_i at the given stress trace."""
    ratio = bauer_factor(params, trT)
    return VoidLimits(e_d=params.e_d0 * ratio, e_c=params.e_c0 * ratio, e_i=params.e_i0 * ratio)


def pykno_fd(e: float, limits: VoidLimits, alpha: float) -> float:
    """Pyknotropy factor f_d."""
    return _fd(e, limits.e_d, limits.e_c, alpha)


def _fd(e: float, e_d: float, e_c: float, alpha: float) -> float:
    base = (e - e_d) / (e_c - e_d)
    if base < 0.0:
        raise InadmissibleStateError(f"void ratio e={e} below e_d={e_d}")
    return base ** alpha


def _fs_denominator(params: HypoParams, a: float) -> float:
    ratio = (params.e_i0 - params.e_d0) / (params.e_c0 - params.e_d0)
    denominator = 3.0 + a * a - a * SQRT3 * ratio ** params.alpha
    if denominator <= 0.0:
        raise DomainError(f"f_s denominator is not positive ({denominator}) for {params!r}")
    return denominator


def _fs(params: HypoParams, a: float, e: float, e_i: float, trT: float) -> float:
    if trT >= 0.0:
        raise DomainError(f"f_s requires trT < 0, got {trT}")
    if e <= 0.0:
        raise DomainError(f"f_s requires e > 0, got {e}")
    numerator = (
        params.h_s / params.n
        * (1.0 + e_i) / e_i
        * (e_i / e) ** params.beta
        * (-trT / params.h_s) ** (1.0 - params.n)
    )
    return numerator / _fs_denominator(params, a)


def stiffness_fs(params: HypoParams, e: float, trT: float) -> float:
    """Combined barotropy/pyknotropy stiffness factor f_s = f_b * f_e."""
    e_i = params.e_i0 * bauer_factor(params, trT)
    return _fs(params, coeff_a(params.phi_c), e, e_i, trT)


def coeff_fb(params: HypoParams, e_i: float, trT: float) -> float:
    """Barotropy factor f_b (original split form of f_s)."""
    a = coeff_a(params.phi_c)
    return (
        (params.e_i0 / params.e_c0) ** params.beta
        * params.h_s / params.n
        * (1.0 + e_i) / e_i
        * (-trT / params.h_s) ** (1.0 - params.n)
        / _fs_denominator(params, a)
    )


def coeff_fe(params: HypoParams, e_c: float, e: float) -> float:
    """Density factor f_e (original split form of f_s)."""
    return (e_c / e) ** params.beta


def admissible_void_ratio(e: float, e_d: float, e_i: float) -> tuple[float, bool]:
    """Return ``(e, clamped)`` with rounding overshoot past e_d / e_i pulled back.

    Raises:
        InadmissibleStateError: e lies outside [e_d, e_i] by more than the tolerance.
    """
    if e < e_d:
        if e_d - e <= ADMISSIBILITY_TOLERANCE * e_d:
            return e_d, True
        raise InadmissibleStateError(f"void ratio e={e:.6g} below e_d={e_d:.6g}")
    if e > e_i:
        if e - e_i <= ADMISSIBILITY_TOLERANCE * e_i:
            return e_i, True
        raise InadmissibleStateError(f"void ratio e={e:.6g} above e_i={e_i:.6g}")
    return e, False


def check_admissible(state: ElementState, params: HypoParams) -> tuple[ElementState, bool]:
    """Validate a state against tr(T) < 0 and e_d <= e <= e_i.

    Returns:
        The (possibly clamped) state and whether clamping happened.
    """
    if state.trace >= 0.0:
        raise InadmissibleStateError(f"stress trace {state.trace} is not compressive")
    limits = void_limits(params, state.trace)
    e, clamped = admissible_void_ratio(state.e, limits.e_d, limits.e_i)
    if clamped:
        logger.warning(f"Clamped void ratio {state.e!r} to {e!r}")
        state = state.model_copy(update={'e': e})
    return state, clamped


def factor_F(stress) -> float:
    """Matsuoka-Nakai shape factor F for an ``ElementState`` or a 3x3 stress tensor.

    Axisymmetric and hydrostatic stresses return exactly 1, which is the limit
    of the general expression where it becomes 0/0.
    """
    T = stress.tensor if isinstance(stress, ElementState) else np.asarray(stress, dtype=float)
    trT = float(np.trace(T))
    if trT >= 0.0:
        raise InadmissibleStateError(f"stress trace {trT} is not compressive")
    T_dev = T / trT - np.eye(3) / 3.0
    T_dev = 0.5 * (T_dev + T_dev.T)
    eigenvalues = np.linalg.eigvalsh(T_dev)
    gap = min(eigenvalues[1] - eigenvalues[0], eigenvalues[2] - eigenvalues[1])
    if gap / SQRT2 < AXISYMMETRY_TOLERANCE:
        return 1.0

    tan_psi = SQRT3 * float(np.linalg.norm(T_dev))
    tr2 = float(np.trace(T_dev @ T_dev))
    tr3 = float(np.trace(T_dev @ T_dev @ T_dev))
    cos_3theta = min(1.0, max(-1.0, -SQRT6 * tr3 / tr2 ** 1.5))

    denominator = 2.0 + SQRT2 * tan_psi * cos_3theta
    if denominator <= 0.0:
        raise DomainError(f"stress obliquity outside the limit surface (tan_psi={tan_psi})")
    radicand = tan_psi ** 2 / 8.0 + (2.0 - tan_psi ** 2) / denominator
    if radicand < 0.0:
        raise DomainError(f"stress obliquity outside the limit surface (tan_psi={tan_psi})")
    return math.sqrt(radicand) - tan_psi / (2.0 * SQRT2)


def rate_general(T, D, e: float, params: HypoParams) -> GeneralRates:
    """Stress and void ratio rates for a 3x3 stress ``T`` and stretching ``D``.

    The spin is taken as zero, so the objective stress rate equals the
    material time derivative.
    """
    T = np.asarray(T, dtype=float)
    D = np.asarray(D, dtype=float)
    trT = float(np.trace(T))
    if trT >= 0.0:
        raise InadmissibleStateError(f"stress trace {trT} is not compressive")

    limits = void_limits(params, trT)
    e, _ = admissible_void_ratio(e, limits.e_d, limits.e_i)

    a = coeff_a(params.phi_c)
    F = factor_F(T)
    f_s = _fs(params, a, e, limits.e_i, trT)
    f_d = _fd(e, limits.e_d, limits.e_c, params.alpha)

    T_hat = T / trT
    T_dev = T_hat - np.eye(3) / 3.0
    norm_D = math.sqrt(float(np.trace(D @ D.T)))

    T_dot = f_s / float(np.trace(T_hat @ T_hat)) * (
        F * F * D
        + a * a * float(np.trace(T_hat @ D)) * T_hat
        + f_d * a * F * (T_hat + T_dev) * norm_D
    )
    e_dot = (1.0 + e) * float(np.trace(D))
    return GeneralRates(T_dot=T_dot, e_dot=e_dot)


def _reference(phi_c: float, h_s: float, n: float, e_d0: float, e_c0: float, e_i0: float,
               alpha: float, beta: float) -> HypoParams:
    return HypoParams.from_degrees(phi_c, h_s=h_s, n=n, e_d0=e_d0, e_c0=e_c0, e_i0=e_i0,
                                   alpha=alpha, beta=beta)


SYNTHETIC_BENCHMARK = SearchParams(
    phi_c=math.radians(34.0), h_s=3.8e6, n=0.30, e_c0=0.886, alpha=0.144, beta=1.5,
    lambda_d=0.60, lambda_i=1.20,
)

# Published parameter sets (h_s in kPa), selectable by name in run configs
REFERENCE_SOILS: dict[str, HypoParams] = {
    'hochstetten_gravel': _reference(36.0, 3.2e7, 0.18, 0.26, 0.45, 0.50, 0.10, 1.9),
    'hochstetten_sand': _reference(33.0, 1.5e6, 0.28, 0.55, 0.95, 1.05, 0.25, 1.0),
    'hostun_sand': _reference(31.0, 1.0e6, 0.29, 0.61, 0.96, 1.09, 0.13, 2.0),
    'karlsruhe_sand': _reference(30.0, 5.8e6, 0.28, 0.53, 0.84, 1.00, 0.13, 1.0),
    'lausitz_sand': _reference(33.0, 1.6e6, 0.19, 0.44, 0.85, 1.00, 0.25, 1.0),
    'toyoura_sand': _reference(30.0, 2.6e6, 0.27, 0.61, 0.98, 1.10, 0.18, 1.1),
    'zbraslav_sand': _reference(31.0, 5.7e6, 0.25, 0.52, 0.82, 0.95, 0.13, 1.0),
    # Hochstetten set used for the element-test validation runs
    'hochstetten_validation': _reference(33.0, 1.0e6, 0.25, 0.55, 0.95, 1.05, 0.25, 1.5),
    'synthetic_benchmark': SYNTHETIC_BENCHMARK.expand(),
}
