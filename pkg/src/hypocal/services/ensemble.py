"""Repeated calibrations and the statistics of their best parameter sets."""

import logging
from concurrent.futures import Executor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, NamedTuple

import numpy as np
import pandas as pd

from ..exceptions import ConfigurationError, HypocalError, ZeroVarianceError
from .genetic_algorithm import CalibrationResult, GaConfig, run
from .hypoplasticity import SEARCH_DISPLAY_NAMES, to_display_units

logger = logging.getLogger(__name__)

# Pairs with |r| at or above this get a regression line
REGRESSION_THRESHOLD = 0.7


class Regression(NamedTuple):
    x: str
    y: str
    slope: float
    intercept: float
    r: float


class TrialFailure(NamedTuple):
    trial: int
    seed: int
    reason: str


@dataclass
class EnsembleResult:
    """Outcome of ``n_trials`` independent calibrations on one dataset.

    ``summary``, ``pearson`` and ``regressions`` only cover the successful
    trials; ``pearson`` is None when some parameter never varied.
    """

    trials: list[CalibrationResult]
    failures: list[TrialFailure]
    summary: pd.DataFrame
    pearson: pd.DataFrame | None
    regressions: list[Regression] = field(default_factory=list)

    @property
    def n_trials(self) -> int:
        return len(self.trials) + len(self.failures)

    def samples(self) -> pd.DataFrame:
        """Best parameters of each successful trial, display units."""
        return _samples_frame(self.trials)

    def trial_table(self) -> pd.DataFrame:
        table = self.samples()
        table.insert(0, 'cost', [trial.cost for trial in self.trials])
        table.insert(0, 'seed', [trial.seed for trial in self.trials])
        return table

    @property
    def cost_envelope(self) -> pd.DataFrame:
        """Per iteration, the extremes across trials of the best and mean pool cost."""
        best = pd.DataFrame([[r.best_cost for r in t.history] for t in self.trials])
        mean = pd.DataFrame([[r.mean_cost for r in t.history] for t in self.trials])
        return pd.DataFrame({
            'iteration': best.columns,
            'best_cost_min': best.min().to_numpy(),
            'best_cost_max': best.max().to_numpy(),
            'mean_cost_min': mean.min().to_numpy(),
            'mean_cost_max': mean.max().to_numpy(),
        })


def _samples_frame(trials: list[CalibrationResult]) -> pd.DataFrame:
    vectors = np.array([trial.search.to_vector() for trial in trials]).reshape(-1, len(SEARCH_DISPLAY_NAMES))
    return pd.DataFrame(to_display_units(vectors), columns=list(SEARCH_DISPLAY_NAMES))


def pearson(samples) -> np.ndarray:
    """Product-moment correlation matrix of the columns of ``samples``.

    Raises:
        ZeroVarianceError: A column is constant.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise ValueError(f"pearson needs an (n >= 2, k) matrix, got shape {samples.shape}")
    constant = np.flatnonzero(samples.std(axis=0) == 0.0)
    if constant.size:
        raise ZeroVarianceError(int(constant[0]))
    r = np.corrcoef(samples, rowvar=False)
    r = np.clip((r + r.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


def fit_line(samples) -> Regression:
    """Ordinary least squares line y = slope * x + intercept through (x, y) rows."""
    samples = np.asarray(samples, dtype=float)
    x, y = samples[:, 0], samples[:, 1]
    if len(x) < 2 or np.ptp(x) == 0.0:
        raise ZeroVarianceError('x')
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    r = float(np.corrcoef(x, y)[0, 1]) if np.ptp(y) > 0.0 else float('nan')
    return Regression(x='x', y='y', slope=float(slope), intercept=float(intercept), r=r)


def summarize(samples: pd.DataFrame) -> pd.DataFrame:
    """Mean, sample standard deviation, coefficient of variation, min and max per column."""
    summary = samples.agg(['mean', 'std', 'min', 'max']).T
    summary.insert(2, 'cv', summary['std'] / summary['mean'])
    return summary[['mean', 'std', 'cv', 'min', 'max']]


def _run_trial(config: GaConfig, cost_function: Callable) -> CalibrationResult:
    return run(config, cost_function)


def run_ensemble(
    config: GaConfig,
    cost_function: Callable[[np.ndarray], float],
    n_trials: int,
    base_seed: int | None = None,
    seeds: list[int] | None = None,
    executor: Executor | None = None,
) -> EnsembleResult:
    """Repeat the calibration with independent seeds and summarise the best sets.

    Args:
        config: GA settings shared by every trial.
        cost_function: Picklable cost callable.
        n_trials: Number of calibrations (at least 2).
        base_seed: Trial k uses ``base_seed + k``; defaults to ``config.seed``.
        seeds: Explicit per-trial seeds, overriding ``base_seed``.
        executor: Optional executor running whole trials in parallel.

    Returns:
        Ensemble result; infeasible or failing trials are listed in ``failures``.
    """
    if n_trials < 2:
        raise ConfigurationError(f"an ensemble needs at least 2 trials, got {n_trials}")
    if seeds is None:
        start = config.seed if base_seed is None else base_seed
        seeds = [start + k for k in range(n_trials)]
    elif len(seeds) != n_trials:
        raise ConfigurationError(f"got {len(seeds)} seeds for {n_trials} trials")

    configs = [config.model_copy(update={'seed': seed}) for seed in seeds]
    if executor is not None:
        futures = [executor.submit(_run_trial, trial_config, cost_function) for trial_config in configs]
        outcomes = []
        for future in futures:
            try:
                outcomes.append(future.result())
            except HypocalError as e:
                outcomes.append(e)
    else:
        outcomes = []
        for trial_config in configs:
            try:
                outcomes.append(_run_trial(trial_config, cost_function))
            except HypocalError as e:
                outcomes.append(e)

    trials, failures = [], []
    for k, (seed, outcome) in enumerate(zip(seeds, outcomes, strict=True)):
        if isinstance(outcome, Exception):
            failures.append(TrialFailure(k, seed, str(outcome)))
        elif not outcome.feasible:
            failures.append(TrialFailure(k, seed, 'no feasible individual'))
        else:
            trials.append(outcome)
            logger.info(f"Trial {k + 1}/{n_trials} (seed={seed}): cost={outcome.cost:.4e}")
    for failure in failures:
        logger.warning(f"Trial {failure.trial} (seed={failure.seed}) excluded: {failure.reason}")

    samples = _samples_frame(trials)
    summary = summarize(samples)
    correlation, regressions = None, []
    if len(trials) >= 2:
        try:
            correlation = pd.DataFrame(pearson(samples.to_numpy()), index=samples.columns, columns=samples.columns)
        except ZeroVarianceError as e:
            logger.warning(f"No correlation matrix: {samples.columns[e.column]} is constant")
    if correlation is not None:
        for x_name, y_name in combinations(samples.columns, 2):
            if abs(correlation.loc[x_name, y_name]) >= REGRESSION_THRESHOLD:
                line = fit_line(samples[[x_name, y_name]].to_numpy())
                regressions.append(line._replace(x=x_name, y=y_name))

    return EnsembleResult(
        trials=trials,
        failures=failures,
        summary=summary,
        pearson=correlation,
        regressions=regressions,
    )
