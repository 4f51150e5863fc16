"""Benchmark problems: constrained Rosenbrock, shifted rotated Rastrigin, fish kinematics.

All objective and constraint callables are module-level functions or frozen
dataclasses so that problems pickle cleanly into worker processes.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domain import Bounds, ConstraintSet, Problem, penalized_objective

DEFAULT_BOX = ((-1.0, -1.0), (1.0, 1.0))
FISH_LENGTH = 0.3
FISH_BOX = ((-0.2, -0.2), (0.2, 0.05))


# ---------------------------------------------------------------- Rosenbrock

@dataclass(frozen=True)
class RosenbrockParams:
    a: float = 0.35
    b: float = 100.0

    @property
    def minimizer(self) -> np.ndarray:
        return np.array([self.a, self.a ** 2])

    def __call__(self, x):
        return rosenbrock(x, self)


def rosenbrock(x, params: RosenbrockParams = RosenbrockParams()):
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return (params.a - x1) ** 2 + params.b * (x2 - x1 ** 2) ** 2


def shared_g1(x):
    x = np.asarray(x, dtype=float)
    return x[..., 1] + 2.5 * x[..., 0] ** 2 - 0.5


def shared_g2(x):
    x = np.asarray(x, dtype=float)
    return -x[..., 1] - x[..., 0] + 0.4


def shared_constraints(x) -> np.ndarray:
    """``(g1, g2)`` shared by the two analytical problems."""
    return np.stack([shared_g1(x), shared_g2(x)], axis=-1)


SHARED_CONSTRAINTS = ConstraintSet((shared_g1, shared_g2))


def shared_feasible_x1_range() -> tuple:
    """Interval of x1 on which ``0.4 - x1 <= 0.5 - 2.5 x1^2`` has solutions."""
    return ((1 - math.sqrt(2)) / 5, (1 + math.sqrt(2)) / 5)


def rosenbrock_problem(params: RosenbrockParams = RosenbrockParams(), box=DEFAULT_BOX,
                       penalty_value: float = 1e6) -> Problem:
    return Problem(
        bounds=Bounds(*box), objective=params, constraints=SHARED_CONSTRAINTS,
        known_optimum=0.0, penalty_value=penalty_value, label="rosenbrock",
    )


# ----------------------------------------------------------------- Rastrigin

@dataclass(frozen=True, eq=False)
class RastriginInstance:
    shift: np.ndarray
    rotation: np.ndarray
    cec_offset: bool = True
    bias: float = -330.0

    def __call__(self, x):
        return rastrigin(x, self)

    @property
    def optimum(self) -> float:
        dim = len(self.shift)
        return self.bias if self.cec_offset else self.bias - 10.0 * dim


def rastrigin(x, instance: RastriginInstance):
    """Shifted rotated Rastrigin with ``z = (x - o) M``.

    With ``cec_offset`` each term gains +10 so the minimum equals ``bias``.
    """
    z = (np.asarray(x, dtype=float) - instance.shift) @ instance.rotation
    offset = 10.0 if instance.cec_offset else 0.0
    return np.sum(z ** 2 - 10.0 * np.cos(2.0 * np.pi * z) + offset, axis=-1) + instance.bias


def make_rotation_matrix(seed: int, dim: int = 2, condition: float = 2.0) -> np.ndarray:
    """Random linear map with singular values ``condition`` and 1.

    ``Q1 @ diag(s) @ Q2`` with orthogonal factors from QR of seeded
    standard-normal matrices.
    """
    rng = np.random.default_rng(seed)
    q1, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    q2, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    s = np.linspace(condition, 1.0, dim)
    return q1 @ np.diag(s) @ q2


def sample_feasible_shift(seed: int, bounds: Bounds, constraints: ConstraintSet = SHARED_CONSTRAINTS,
                          max_draws: int = 100_000) -> np.ndarray:
    """Uniform draw from the feasible region by rejection inside the box."""
    rng = np.random.default_rng(seed)
    for _ in range(max_draws):
        x = bounds.lower + rng.random(bounds.dim) * bounds.widths
        if constraints.satisfied(x[None, :])[0]:
            return x
    raise RuntimeError("could not draw a feasible shift")


def make_rastrigin_instance(seed: int = 0, cec_offset: bool = True, box=DEFAULT_BOX) -> RastriginInstance:
    bounds = Bounds(*box)
    shift = sample_feasible_shift(seed, bounds)
    return RastriginInstance(shift, make_rotation_matrix(seed), cec_offset)


def rastrigin_problem(instance: Optional[RastriginInstance] = None, box=DEFAULT_BOX,
                      penalty_value: float = 1e6) -> Problem:
    instance = instance if instance is not None else make_rastrigin_instance(box=box)
    return Problem(
        bounds=Bounds(*box), objective=instance, constraints=SHARED_CONSTRAINTS,
        known_optimum=instance.optimum, penalty_value=penalty_value, label="rastrigin",
    )


# ---------------------------------------------------------------------- fish

def fish_g1(x, L=FISH_LENGTH):
    x = np.asarray(x, dtype=float)
    return 0.4 * x[..., 1] * L + x[..., 0] ** 2


def fish_g2(x, L=FISH_LENGTH):
    x = np.asarray(x, dtype=float)
    return np.abs(x[..., 1] + x[..., 0]) - 0.1 * L


def fish_g3(x, L=FISH_LENGTH):
    return np.asarray(x, dtype=float)[..., 1]


def fish_constraint_set(L: float = FISH_LENGTH) -> ConstraintSet:
    return ConstraintSet(tuple(functools.partial(g, L=L) for g in (fish_g1, fish_g2, fish_g3)))


def fish_constraints(x, L: float = FISH_LENGTH) -> np.ndarray:
    """Swimming-mode constraints ``(g1, g2, g3)``; all ``<= 0`` when realizable."""
    return np.stack([fish_g1(x, L), fish_g2(x, L), fish_g3(x, L)], axis=-1)


def fish_problem(objective: Callable, L: float = FISH_LENGTH, box=FISH_BOX) -> Problem:
    """Swimming-gait problem; the objective must come from an external evaluator."""
    return Problem(
        bounds=Bounds(*box), objective=objective, constraints=fish_constraint_set(L),
        known_optimum=None, label="fish",
    )


@dataclass(frozen=True)
class FishKinematics:
    x1: float
    x2: float
    L: float = FISH_LENGTH
    wavelength: float = 1.1
    freq: float = 1.0

    def __post_init__(self):
        if self.L <= 0 or self.wavelength <= 0 or self.freq <= 0:
            raise ValueError("L, wavelength and freq must be positive")

    @property
    def period(self) -> float:
        return 1.0 / self.freq


def fish_midline(kin: FishKinematics, p, t):
    """Lateral midline displacement at body position ``p`` and time ``t``."""
    s = np.asarray(p, dtype=float) / kin.L
    envelope = kin.x1 * s + kin.x2 * s ** 2
    return envelope * np.sin(2.0 * np.pi * (s / kin.wavelength - kin.freq * np.asarray(t, dtype=float)))


def kinematics_snapshots(kin: FishKinematics, n_points: int = 101, n_snapshots: int = 11) -> list:
    """Rows ``(p, snapshot, t, y)`` for evenly spaced times over one period."""
    if n_points < 2 or n_snapshots < 1:
        raise ValueError("need n_points >= 2 and n_snapshots >= 1")
    p = np.linspace(0.0, kin.L, n_points)
    rows = []
    for k in range(n_snapshots):
        t = k * kin.period / (n_snapshots - 1) if n_snapshots > 1 else 0.0
        y = fish_midline(kin, p, t)
        rows.extend((float(pi), k, float(t), float(yi)) for pi, yi in zip(p, y))
    return rows


# --------------------------------------------------------------- emission

def landscape(problem: Problem, resolution: int = 101) -> list:
    """Rows ``(x1, x2, f_penalized, feasible)`` on a rectilinear grid over the box."""
    if problem.dim != 2:
        raise ValueError("landscape emission supports 2-D problems only")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    g1 = np.linspace(problem.bounds.lower[0], problem.bounds.upper[0], resolution)
    g2 = np.linspace(problem.bounds.lower[1], problem.bounds.upper[1], resolution)
    rows = []
    for x2 in g2:
        for x1 in g1:
            x = np.array([x1, x2])
            feasible = problem.is_feasible(x)
            rows.append((float(x1), float(x2), penalized_objective(x, problem), int(feasible)))
    return rows


LANDSCAPE_HEADER = ("x1", "x2", "f", "feasible")
KINEMATICS_HEADER = ("p", "snapshot", "t", "y")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
