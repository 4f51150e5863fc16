"""Initial designs, candidate clouds and the zero-penalty feasibility filter."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .domain import Bounds, ConstraintSet, Problem


class InfeasibleRegionError(RuntimeError):
    """The initial design quota could not be filled with feasible points."""


class ResampleExhaustedError(RuntimeError):
    """No usable feasible candidate was found within the resample budget."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


@dataclass(frozen=True)
class SamplerConfig:
    card_U: int = 2000
    card_N: int = 2000
    perturbation_rates: tuple = (0.1, 0.01, 0.001)
    initial_design_size: int = 20
    max_resample_attempts: int = 100

    def __post_init__(self):
        object.__setattr__(self, "perturbation_rates", tuple(float(r) for r in self.perturbation_rates))
        if self.card_U < 0 or self.card_N < 0 or self.card_U + self.card_N == 0:
            raise ValueError("candidate cloud must have at least one point")
        if not self.perturbation_rates or any(r <= 0 for r in self.perturbation_rates):
            raise ValueError("perturbation rates must be strictly positive")
        if self.initial_design_size < 1:
            raise ValueError("initial_design_size must be >= 1")
        if self.max_resample_attempts < 1:
            raise ValueError("max_resample_attempts must be >= 1")


@dataclass
class CandidateCloud:
    global_points: np.ndarray
    local_points: np.ndarray
    penalties: Optional[np.ndarray] = None
    feasible: Optional[np.ndarray] = field(default=None)

    @property
    def points(self) -> np.ndarray:
        return np.vstack([self.global_points, self.local_points])

    def __len__(self):
        return len(self.global_points) + len(self.local_points)


def latin_hypercube(n_points: int, bounds: Bounds, rng: np.random.Generator) -> np.ndarray:
    """Latin hypercube design with uniform placement inside each stratum."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    dim = bounds.dim
    strata = np.column_stack([rng.permutation(n_points) for _ in range(dim)])
    unit = (strata + rng.random((n_points, dim))) / n_points
    points = bounds.lower + unit * bounds.widths
    # guard against round-up onto the open end of the last stratum
    return np.minimum(points, bounds.upper)


def feasible_initial_design(problem: Problem, config: SamplerConfig, rng: np.random.Generator,
                            n_points: Optional[int] = None, existing=()) -> np.ndarray:
    """Draw LHS batches over the box and keep feasible rows until the quota fills.

    Stratification holds within each batch, not over the returned union.
    Rows duplicating ``existing`` points or each other are skipped.
    """
    quota = config.initial_design_size if n_points is None else n_points
    if quota <= 0:
        return np.empty((0, problem.dim))
    seen = [np.asarray(p, dtype=float) for p in existing]
    count = 0
    tol = problem.duplicate_tolerance()
    for _ in range(config.max_resample_attempts):
        batch = latin_hypercube(config.initial_design_size, problem.bounds, rng)
        for row in batch[problem.feasible_mask(batch)]:
            if seen and np.min(np.max(np.abs(np.array(seen) - row), axis=1)) <= tol:
                continue
            seen.append(row)
            count += 1
            if count == quota:
                return np.array(seen[len(seen) - quota:])
    raise InfeasibleRegionError(
        f"only {count} of {quota} feasible design points after "
        f"{config.max_resample_attempts} LHS batches"
    )


def _rate_counts(card_N: int, n_rates: int) -> list:
    counts = [card_N // n_rates] * n_rates
    smallest = n_rates - 1
    counts[smallest] += card_N - sum(counts)
    return counts


def generate_candidates(best_x, bounds: Bounds, config: SamplerConfig,
                        rng: np.random.Generator) -> CandidateCloud:
    """Uniform global points over the box plus Gaussian perturbations of ``best_x``.

    The local part is split evenly across the perturbation rates, with the
    division remainder assigned to the smallest rate. Each rate scales a
    standard normal draw by ``rate * min(upper - lower)``; out-of-box local
    points are clipped to the boundary.
    """
    best_x = np.asarray(best_x, dtype=float)
    dim = bounds.dim
    global_points = bounds.lower + rng.random((config.card_U, dim)) * bounds.widths

    rates = sorted(config.perturbation_rates, reverse=True)
    counts = _rate_counts(config.card_N, len(rates))
    sigma = np.repeat(np.array(rates) * bounds.min_width, counts)
    noise = rng.standard_normal((config.card_N, dim))
    local_points = bounds.clip(best_x + sigma[:, None] * noise)
    return CandidateCloud(global_points, local_points)


def penalty_vector(points, constraints: ConstraintSet) -> np.ndarray:
    """Sum of positive constraint violations per row; zero exactly on the feasible set."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(constraints) == 0:
        return np.zeros(points.shape[0])
    return np.sum(np.maximum(0.0, constraints.evaluate(points)), axis=1)


def filter_feasible(cloud: CandidateCloud, constraints: ConstraintSet, archive_x,
                    bounds: Optional[Bounds] = None, duplicate_tol: float = 0.0,
                    enforce_constraints: bool = True) -> np.ndarray:
    """Keep zero-penalty rows that do not duplicate archived points.

    Fills ``cloud.penalties`` and ``cloud.feasible``. An empty result means the
    caller should regenerate the cloud. With ``enforce_constraints=False`` only
    duplicates are removed (penalty-baseline mode).
    """
    points = cloud.points
    cloud.penalties = penalty_vector(points, constraints)
    keep = np.ones(len(points), dtype=bool)
    if enforce_constraints:
        keep &= cloud.penalties == 0.0
    if bounds is not None:
        keep &= bounds.contains(points)
    archive_x = np.asarray(archive_x, dtype=float)
    if archive_x.size and np.any(keep):
        nearest = cdist(points[keep], archive_x, metric="chebyshev").min(axis=1)
        idx = np.flatnonzero(keep)
        keep[idx[(nearest <= duplicate_tol)]] = False
    cloud.feasible = points[keep]
    return cloud.feasible


def draw_feasible_candidates(best_x, problem: Problem, archive_x, config: SamplerConfig,
                             rng: np.random.Generator, enforce_constraints: bool = True) -> np.ndarray:
    """Regenerate candidate clouds until the filtered set is nonempty."""
    for _ in range(config.max_resample_attempts):
        cloud = generate_candidates(best_x, problem.bounds, config, rng)
        feasible = filter_feasible(
            cloud, problem.constraints, archive_x, problem.bounds,
            problem.duplicate_tolerance(), enforce_constraints,
        )
        if len(feasible):
            return feasible
    raise ResampleExhaustedError(
        f"no new feasible candidate after {config.max_resample_attempts} resamples"
    )
