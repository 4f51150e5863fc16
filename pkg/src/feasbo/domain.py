"""Problem definition and result types shared across the package."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

DEFAULT_PENALTY = 1e6
DUPLICATE_RELATIVE_TOL = 1e-12


class InfeasiblePointError(ValueError):
    """An infeasible point was inserted into a strict-feasibility archive."""


class DuplicatePointError(ValueError):
    """A point coincides with an archived point within the duplicate tolerance."""


@dataclass(frozen=True)
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be 1-D vectors of equal length")
        if lower.size < 1:
            raise ValueError("bounds need at least one dimension")
        if not np.all(lower < upper):
            raise ValueError(f"lower must be strictly below upper: {lower} vs {upper}")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def min_width(self) -> float:
        return float(np.min(self.upper - self.lower))

    def contains(self, points) -> np.ndarray:
        """Inclusive box membership, row-wise for a matrix."""
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)

    def clip(self, points) -> np.ndarray:
        return np.clip(points, self.lower, self.upper)


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered inequality constraints ``g_r(x) <= 0``.

    Each function maps an ``(m, n)`` matrix to an ``(m,)`` vector. Set
    ``vectorized=False`` for callables that only take a single point; they are
    then applied row by row.
    """

    inequalities: tuple = ()
    vectorized: bool = True

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))

    def __len__(self):
        return len(self.inequalities)

    def evaluate(self, points) -> np.ndarray:
        """Return the ``(m, q)`` matrix of constraint values."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        m = points.shape[0]
        out = np.empty((m, len(self.inequalities)))
        for r, g in enumerate(self.inequalities):
            if self.vectorized:
                out[:, r] = np.broadcast_to(np.asarray(g(points), dtype=float), (m,))
            else:
                out[:, r] = [float(g(row)) for row in points]
        return out

    def satisfied(self, points) -> np.ndarray:
        return np.all(self.evaluate(points) <= 0.0, axis=1)


@dataclass(frozen=True)
class Problem:
    bounds: Bounds
    objective: Callable
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    known_optimum: Optional[float] = None
    penalty_value: float = DEFAULT_PENALTY
    label: str = "problem"

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size != self.dim:
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        return x

    def is_feasible(self, x) -> bool:
        return is_feasible(x, self)

    def feasible_mask(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return self.bounds.contains(points) & self.constraints.satisfied(points)

    def duplicate_tolerance(self) -> float:
        return DUPLICATE_RELATIVE_TOL * self.bounds.min_width


def is_feasible(x, problem: Problem) -> bool:
    """True iff ``x`` lies in the box and every ``g_r(x) <= 0`` (boundary inclusive)."""
    x = problem._check(x)
    if not bool(problem.bounds.contains(x)):
        return False
    return bool(problem.constraints.satisfied(x[None, :])[0])


def penalized_objective(x, problem: Problem) -> float:
    x = problem._check(x)
    if not is_feasible(x, problem):
        return float(problem.penalty_value)
    return float(problem.objective(x))


class Source(str, enum.Enum):
    INITIAL_DESIGN = "initial_design"
    INFILL = "infill"


class Termination(str, enum.Enum):
    TOLERANCE_MET = "tolerance_met"
    RELATIVE_CHANGE_MET = "relative_change_met"
    MAX_ITERATIONS = "max_iterations"
    RESAMPLE_EXHAUSTED = "resample_exhausted"


@dataclass(frozen=True)
class EvaluatedPoint:
    x: np.ndarray
    f: float
    iteration_index: int
    source: Source


class Archive:
    """Evaluated points in insertion order with a running best.

    :param duplicate_tol: infinity-norm radius within which a new point is
        treated as a duplicate of an archived one.
    :param feasibility: optional predicate every inserted point must satisfy.
    """

    def __init__(self, duplicate_tol: float = 0.0, feasibility: Optional[Callable] = None):
        self.duplicate_tol = float(duplicate_tol)
        self.feasibility = feasibility
        self.points: list[EvaluatedPoint] = []
        self.best_index: Optional[int] = None
        self._x_cache: Optional[np.ndarray] = None

    @classmethod
    def for_problem(cls, problem: Problem, strict: bool = True) -> "Archive":
        return cls(problem.duplicate_tolerance(), problem.is_feasible if strict else None)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]

    @property
    def x(self) -> np.ndarray:
        if self._x_cache is None:
            if not self.points:
                return np.empty((0, 0))
            self._x_cache = np.array([p.x for p in self.points])
        return self._x_cache

    @property
    def f(self) -> np.ndarray:
        return np.array([p.f for p in self.points], dtype=float)

    @property
    def best(self) -> EvaluatedPoint:
        if self.best_index is None:
            raise LookupError("archive is empty")
        return self.points[self.best_index]

    def is_duplicate(self, x) -> bool:
        if not self.points:
            return False
        gap = np.max(np.abs(self.x - np.asarray(x, dtype=float)), axis=1)
        return bool(np.any(gap < self.duplicate_tol)) or bool(np.any(gap == 0.0))

    def append(self, x, f: float, iteration_index: int, source: Source) -> EvaluatedPoint:
        x = np.array(x, dtype=float)
        if self.feasibility is not None and not self.feasibility(x):
            raise InfeasiblePointError(f"point {x.tolist()} violates the feasible set")
        if self.is_duplicate(x):
            raise DuplicatePointError(f"point {x.tolist()} duplicates an archived point")
        x.flags.writeable = False
        point = EvaluatedPoint(x, float(f), int(iteration_index), Source(source))
        self.points.append(point)
        self._x_cache = None
        # strict < keeps the earliest of tied minima
        if self.best_index is None or point.f < self.points[self.best_index].f:
            self.best_index = len(self.points) - 1
        return point


@dataclass
class RunRecord:
    history: Archive
    termination: Termination
    seed: int
    best_x: np.ndarray
    best_f: float

    @property
    def evaluations_used(self) -> int:
        return len(self.history)

    def error(self, known_optimum: float, metric: str = "absolute") -> float:
        gap = abs(self.best_f - known_optimum)
        if metric == "relative":
            return gap / abs(known_optimum)
        return gap

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "termination": self.termination.value,
            "evaluations_used": self.evaluations_used,
            "best_x": [float(v) for v in self.best_x],
            "best_f": float(self.best_f),
            "history": [
                {
                    "iteration": p.iteration_index,
                    "source": p.source.value,
                    "x": [float(v) for v in p.x],
                    "f": p.f,
                }
                for p in self.history.points
            ],
        }

