"""Real-coded genetic algorithm over the six free hypoplastic parameters.

Each generation keeps the best individuals unchanged (elitism), injects
uniform random mutants whose share decays exponentially, and fills the rest
with blend-crossover offspring of parents drawn from a rank-triangular
distribution over the mating pool.
"""

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, model_validator

from .curve_metrics import CostWeights, Plane
from .hypoplasticity import (
    SEARCH_DISPLAY_NAMES,
    HypoParams,
    SearchParams,
    from_display_units,
    to_display_units,
)

logger = logging.getLogger(__name__)

N_PARAMETERS = 6

# Search box in display units: phi_c (deg), h_s (kPa), n, e_c0, alpha, beta
DEFAULT_BOUNDS_MIN = (25.0, 1.0e6, 0.25, 0.6, 0.05, 1.0)
DEFAULT_BOUNDS_MAX = (40.0, 9.0e6, 0.40, 1.1, 0.20, 2.0)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


class GaConfig(BaseModel):
    """Genetic algorithm settings.

    Bounds are stored in internal units (phi_c in radians); use
    ``GaConfig.from_display_bounds`` to pass them in degrees.
    """

    model_config = ConfigDict(frozen=True)

    n_individuals: int = Field(default=500, ge=2)
    n_iterations: NonNegativeInt = 20
    elite_fraction: float = Field(default=0.01, gt=0.0, le=1.0)
    mating_fraction: float = Field(default=0.50, gt=0.0, le=1.0)
    mutation_start: float = Field(default=0.5, gt=0.0, lt=1.0)
    mutation_end: float = Field(default=0.1, gt=0.0, lt=1.0)
    bounds_min: tuple[float, float, float, float, float, float] = tuple(
        from_display_units(DEFAULT_BOUNDS_MIN)
    )
    bounds_max: tuple[float, float, float, float, float, float] = tuple(
        from_display_units(DEFAULT_BOUNDS_MAX)
    )
    lambda_d: float = 0.60
    lambda_i: float = 1.20
    weights: CostWeights = CostWeights()
    seed: NonNegativeInt = 0

    @model_validator(mode='after')
    def _check(self) -> 'GaConfig':
        if self.mutation_end > self.mutation_start:
            raise ValueError("mutation_end must not exceed mutation_start")
        lo, hi = np.array(self.bounds_min), np.array(self.bounds_max)
        if not (lo < hi).all():
            raise ValueError("bounds_min must be below bounds_max componentwise")
        if not (0.0 < lo[0] and hi[0] < math.pi / 2):
            raise ValueError("phi_c bounds must lie inside (0, 90) degrees")
        if not (0.0 < lo[2] and hi[2] < 1.0):
            raise ValueError("n bounds must lie inside (0, 1)")
        if not (lo[[1, 3, 4, 5]] > 0.0).all():
            raise ValueError("h_s, e_c0, alpha and beta bounds must be positive")
        if not 0.0 < self.lambda_d < 1.0 < self.lambda_i:
            raise ValueError("ratios must satisfy 0 < lambda_d < 1 < lambda_i")
        return self

    @classmethod
    def from_display_bounds(cls, bounds_min, bounds_max, **kwargs) -> 'GaConfig':
        return cls(
            bounds_min=tuple(from_display_units(bounds_min)),
            bounds_max=tuple(from_display_units(bounds_max)),
            **kwargs,
        )

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.bounds_min)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.bounds_max)


@dataclass
class Population:
    """Individuals as rows; NaN cost marks an individual not yet evaluated."""

    individuals: np.ndarray
    costs: np.ndarray
    ranking: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.individuals)


@dataclass(frozen=True)
class IterationRecord:
    """Mating-pool statistics after one evaluation."""

    iteration: int
    best_cost: float
    mean_cost: float
    worst_cost: float
    n_feasible: int
    param_mean: np.ndarray
    param_std: np.ndarray


@dataclass
class CalibrationResult:
    search: SearchParams
    params: HypoParams
    cost: float
    deltas: dict[Plane, float]
    history: list[IterationRecord]
    seed: int
    feasible: bool = True
    population: Population | None = field(default=None, repr=False)

    def history_frame(self) -> pd.DataFrame:
        """One row per iteration with pool costs and parameter bands (display units)."""
        rows = []
        for record in self.history:
            row = {
                'iteration': record.iteration,
                'best_cost': record.best_cost,
                'mean_cost': record.mean_cost,
                'worst_cost': record.worst_cost,
                'n_feasible': record.n_feasible,
            }
            mean = to_display_units(record.param_mean)
            std = record.param_std.copy()
            std[0] = np.degrees(std[0])
            for name, mu, sigma in zip(SEARCH_DISPLAY_NAMES, mean, std, strict=True):
                row[f'{name}_mean'] = mu
                row[f'{name}_std'] = sigma
            rows.append(row)
        return pd.DataFrame(rows)


def init_pop(config: GaConfig, rng: np.random.Generator) -> Population:
    """Initial population: a Gaussian half around the box centre, then a uniform half.

    The Gaussian block uses sigma = range / 6 and is clipped to the bounds.
    """
    lo, hi = config.lower, config.upper
    n_gauss = config.n_individuals // 2
    gaussian = np.clip(rng.normal((lo + hi) / 2.0, (hi - lo) / 6.0, size=(n_gauss, N_PARAMETERS)), lo, hi)
    uniform = rng.uniform(lo, hi, size=(config.n_individuals - n_gauss, N_PARAMETERS))
    individuals = np.vstack([gaussian, uniform])
    return Population(individuals=individuals, costs=np.full(len(individuals), np.nan))


def eval_pop(
    population: Population,
    cost_function: Callable[[np.ndarray], float],
    executor: Executor | None = None,
) -> np.ndarray:
    """Evaluate the individuals without a cost and rank the population.

    Results are gathered in index order, so the ranking does not depend on
    how evaluations are scheduled.

    Returns:
        Indices sorting costs ascending (stable, infinite costs last).
    """
    pending = np.flatnonzero(np.isnan(population.costs))
    candidates = [population.individuals[i] for i in pending]
    if executor is not None and len(candidates) > 1:
        costs = list(executor.map(cost_function, candidates))
    else:
        costs = [cost_function(candidate) for candidate in candidates]

    if len(pending):
        population.costs[pending] = np.nan_to_num(
            np.asarray(costs, dtype=float), nan=np.inf, posinf=np.inf
        )
    population.ranking = np.argsort(population.costs, kind='stable')
    return population.ranking


def mutation_fraction(iteration: int, config: GaConfig) -> float:
    """Share of mutants at ``iteration``, decaying from mutation_start to mutation_end."""
    if config.n_iterations == 0:
        return config.mutation_start
    return config.mutation_start * math.exp(
        iteration / config.n_iterations * math.log(config.mutation_end / config.mutation_start)
    )


def cohort_sizes(iteration: int, config: GaConfig) -> tuple[int, int, int]:
    """Numbers of elites, mutants and offspring; they always sum to n_individuals."""
    n_i = config.n_individuals
    n_elite = min(n_i, max(1, _round_half_up(config.elite_fraction * n_i)))
    n_mutant = min(n_i - n_elite, _round_half_up(mutation_fraction(iteration, config) * n_i))
    return n_elite, n_mutant, n_i - n_elite - n_mutant


def mating_pool_size(config: GaConfig) -> int:
    return min(config.n_individuals, max(2, _round_half_up(config.mating_fraction * config.n_individuals)))


def _draw_ranks(n_pool: int, size, rng: np.random.Generator):
    # Weights n_pool - n for ranks n = 1..n_pool; the last rank is never drawn
    weights = np.arange(n_pool - 1, -1, -1, dtype=float)
    cdf = np.cumsum(weights) / weights.sum()
    return np.searchsorted(cdf, rng.uniform(size=size), side='right') + 1


def select_parent(ranking: np.ndarray, n_pool: int, rng: np.random.Generator) -> int:
    """Draw one individual from the best ``n_pool`` with triangular rank weights."""
    if n_pool < 2:
        raise ValueError(f"mating pool needs at least 2 individuals, got {n_pool}")
    return int(ranking[_draw_ranks(n_pool, None, rng) - 1])


def crossover(parent1: np.ndarray, parent2: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Blend crossover theta * P1 + (1 - theta) * P2 with theta ~ U[0, 1) per component."""
    theta = rng.uniform(size=np.shape(parent1))
    return parent2 + theta * (parent1 - parent2)


def update_pop(
    population: Population,
    ranking: np.ndarray,
    iteration: int,
    config: GaConfig,
    rng: np.random.Generator,
) -> Population:
    """Next generation: elites, then uniform mutants, then crossover offspring.

    Random draws happen in that order: mutants, parent ranks, blend factors.
    """
    lo, hi = config.lower, config.upper
    n_elite, n_mutant, n_offspring = cohort_sizes(iteration, config)
    elite_index = ranking[:n_elite]

    mutants = rng.uniform(lo, hi, size=(n_mutant, N_PARAMETERS))
    ranks = _draw_ranks(mating_pool_size(config), (n_offspring, 2), rng)
    parents = population.individuals[ranking[ranks - 1]]
    offspring = np.clip(crossover(parents[:, 0], parents[:, 1], rng), lo, hi)

    individuals = np.vstack([population.individuals[elite_index], mutants, offspring])
    costs = np.concatenate([population.costs[elite_index], np.full(n_mutant + n_offspring, np.nan)])
    return Population(individuals=individuals, costs=costs)


def _record(iteration: int, population: Population, ranking: np.ndarray, n_pool: int) -> IterationRecord:
    pool = ranking[:n_pool]
    pool_costs = population.costs[pool]
    finite = pool_costs[np.isfinite(pool_costs)]
    pool_params = population.individuals[pool]
    return IterationRecord(
        iteration=iteration,
        best_cost=float(pool_costs[0]),
        mean_cost=float(finite.mean()) if finite.size else math.inf,
        worst_cost=float(finite.max()) if finite.size else math.inf,
        n_feasible=int(np.isfinite(population.costs).sum()),
        param_mean=pool_params.mean(axis=0),
        param_std=pool_params.std(axis=0),
    )


def run(
    config: GaConfig,
    cost_function: Callable[[np.ndarray], float],
    executor: Executor | None = None,
) -> CalibrationResult:
    """Run a full calibration.

    Args:
        config: Algorithm settings, including the RNG seed.
        cost_function: Maps a six-entry search vector to a cost (+inf if infeasible).
        executor: Optional executor for the cost evaluations.

    Returns:
        Best parameters of the final population with the iteration history.
    """
    rng = np.random.default_rng(config.seed)
    n_pool = mating_pool_size(config)

    population = init_pop(config, rng)
    ranking = eval_pop(population, cost_function, executor)
    history = [_record(0, population, ranking, n_pool)]

    for iteration in range(1, config.n_iterations + 1):
        population = update_pop(population, ranking, iteration, config, rng)
        ranking = eval_pop(population, cost_function, executor)
        record = _record(iteration, population, ranking, n_pool)
        history.append(record)
        logger.info(
            f"Iteration {iteration}/{config.n_iterations}: best={record.best_cost:.4e} "
            f"mean={record.mean_cost:.4e} feasible={record.n_feasible}"
        )

    best = population.individuals[ranking[0]]
    best_cost = float(population.costs[ranking[0]])
    search = SearchParams.from_vector(best, config.lambda_d, config.lambda_i)
    feasible = math.isfinite(best_cost)
    if not feasible:
        logger.warning(f"No feasible individual found (seed={config.seed})")

    breakdown = getattr(cost_function, 'breakdown', None)
    deltas = breakdown(best).deltas if breakdown is not None and feasible else {}

    return CalibrationResult(
        search=search,
        params=search.expand(),
        cost=best_cost,
        deltas=deltas,
        history=history,
        seed=config.seed,
        feasible=feasible,
        population=population,
    )
