"""Surrogate-based optimization loop with metric stochastic response surface infill."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import surrogate
from .domain import Archive, Problem, RunRecord, Source, Termination, penalized_objective
from .sampling import (
    ResampleExhaustedError,
    SamplerConfig,
    draw_feasible_candidates,
    feasible_initial_design,
)
from .surrogate import KrigingConfig

logger = logging.getLogger(__name__)

STRICT = "strict_feasible"
PENALTY = "penalty_baseline"
MODES = (STRICT, PENALTY)


@dataclass(frozen=True)
class MsrsConfig:
    weight_cycle: tuple = (0.3, 0.5, 0.8, 0.95, 1.0)
    k_max: int = 200
    absolute_tolerance: Optional[float] = None
    relative_change_tolerance: Optional[float] = None
    mode: str = STRICT

    def __post_init__(self):
        object.__setattr__(self, "weight_cycle", tuple(float(w) for w in self.weight_cycle))
        if not self.weight_cycle or any(not 0.0 <= w <= 1.0 for w in self.weight_cycle):
            raise ValueError("weight_cycle must be nonempty with entries in [0, 1]")
        if self.k_max < 0:
            raise ValueError("k_max must be nonnegative")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("absolute_tolerance", "relative_change_tolerance"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be nonnegative")

    def weight(self, iteration: int) -> float:
        return self.weight_cycle[iteration % len(self.weight_cycle)]


@dataclass(frozen=True)
class SBOConfig:
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    kriging: KrigingConfig = field(default_factory=KrigingConfig)
    msrs: MsrsConfig = field(default_factory=MsrsConfig)


@dataclass(frozen=True)
class Progress:
    iteration: int
    best_f: float
    evaluations: int


def _unit_scale(values: np.ndarray) -> np.ndarray:
    lo, hi = np.min(values), np.max(values)
    if hi == lo:
        return np.zeros_like(values, dtype=float)
    return (values - lo) / (hi - lo)


def nearest_distances(candidates, archive_x) -> np.ndarray:
    """Euclidean distance from each candidate to its closest archived point."""
    return cdist(np.atleast_2d(candidates), np.atleast_2d(archive_x)).min(axis=1)


def msrs_score(candidates, surrogate_values, archive_x, weight: float,
               distances: Optional[np.ndarray] = None) -> np.ndarray:
    """Weighted sum of scaled surrogate value and scaled closeness; lower is better.

    Surrogate values are min-max scaled to [0, 1]. Nearest-archive distances
    map to ``(d_max - d) / (d_max - d_min)`` so far-away points score 0.
    Constant columns scale to 0.
    """
    values = np.asarray(surrogate_values, dtype=float)
    if distances is None:
        distances = nearest_distances(candidates, archive_x)
    distances = np.asarray(distances, dtype=float)
    closeness = 1.0 - _unit_scale(distances)
    if np.max(distances) == np.min(distances):
        closeness = np.zeros_like(distances)
    return weight * _unit_scale(values) + (1.0 - weight) * closeness


def select_index(scores: np.ndarray, surrogate_values: np.ndarray) -> int:
    """Argmin of score; ties go to the smaller surrogate value, then lower index."""
    order = np.lexsort((np.arange(len(scores)), surrogate_values, scores))
    return int(order[0])


def select_next(candidates, model, archive_x, config: MsrsConfig, iteration: int) -> np.ndarray:
    candidates = np.atleast_2d(candidates)
    values = surrogate.predict(model, candidates)
    scores = msrs_score(candidates, values, archive_x, config.weight(iteration))
    return candidates[select_index(scores, values)]


def _admit_starts(problem: Problem, starts: Sequence, strict: bool) -> list:
    kept = []
    for start in starts:
        start = np.asarray(start, dtype=float)
        if start.shape != (problem.dim,):
            raise ValueError(f"start {start.tolist()} has wrong dimension")
        if problem.is_feasible(start):
            kept.append(start)
        else:
            # some published starting points violate their own constraint set
            logger.warning("dropping infeasible start %s", start.tolist())
    return kept


def optimize(problem: Problem, config: Optional[SBOConfig] = None, seed: int = 0,
             starts: Sequence = (), progress: Optional[Callable[[Progress], None]] = None) -> RunRecord:
    """Run one realization of the surrogate-based optimizer.

    In strict mode only points with zero constraint penalty are ever passed to
    the objective. In penalty-baseline mode candidates are drawn from the whole
    box and infeasible points receive ``problem.penalty_value``.

    Feasible ``starts`` replace the first initial-design points; infeasible
    ones are dropped with a warning.
    """
    config = config or SBOConfig()
    msrs = config.msrs
    strict = msrs.mode == STRICT
    rng = np.random.default_rng(seed)

    if strict:
        evaluate = problem.objective
    else:
        def evaluate(x):
            return penalized_objective(x, problem)

    archive = Archive.for_problem(problem, strict=strict)
    seeds = _admit_starts(problem, starts, strict)[: config.sampler.initial_design_size]
    design = feasible_initial_design(
        problem, config.sampler, rng,
        n_points=config.sampler.initial_design_size - len(seeds), existing=seeds,
    )
    for x in [*seeds, *design]:
        archive.append(x, float(evaluate(x)), 0, Source.INITIAL_DESIGN)

    def record(termination):
        best = archive.best
        return RunRecord(archive, termination, seed, np.array(best.x), best.f)

    def tolerance_met():
        tol = msrs.absolute_tolerance
        return (tol is not None and problem.known_optimum is not None
                and abs(archive.best.f - problem.known_optimum) <= tol)

    if progress is not None:
        progress(Progress(0, archive.best.f, len(archive)))
    if tolerance_met():
        return record(Termination.TOLERANCE_MET)

    model = surrogate.fit(archive.x, archive.f, config.kriging)
    k = 0
    termination = Termination.MAX_ITERATIONS
    while k < msrs.k_max:
        try:
            candidates = draw_feasible_candidates(
                archive.best.x, problem, archive.x, config.sampler, rng, enforce_constraints=strict,
            )
        except ResampleExhaustedError as exc:
            exc.record = record(Termination.RESAMPLE_EXHAUSTED)
            raise
        x_next = select_next(candidates, model, archive.x, msrs, k)
        previous_best = archive.best.f
        archive.append(x_next, float(evaluate(x_next)), k + 1, Source.INFILL)
        k += 1
        if progress is not None:
            progress(Progress(k, archive.best.f, len(archive)))

        if tolerance_met():
            termination = Termination.TOLERANCE_MET
            break
        rtol = msrs.relative_change_tolerance
        if rtol is not None and abs(archive.best.f - previous_best) <= rtol * abs(previous_best):
            termination = Termination.RELATIVE_CHANGE_MET
            break
        if k < msrs.k_max:
            model = surrogate.fit(archive.x, archive.f, config.kriging, theta0=model.theta)
    return record(termination)
