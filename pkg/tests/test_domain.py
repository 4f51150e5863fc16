import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feasbo import problems
from feasbo.domain import (
    Archive,
    Bounds,
    ConstraintSet,
    DuplicatePointError,
    InfeasiblePointError,
    Problem,
    Source,
    is_feasible,
    penalized_objective,
)


@pytest.fixture
def fish():
    return problems.fish_problem(objective=lambda x: 0.0)


def test_bounds_reject_zero_width():
    with pytest.raises(ValueError):
        Bounds([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Bounds([], [])
    with pytest.raises(ValueError):
        Bounds([0.0], [1.0, 2.0])


@pytest.mark.parametrize("x, expected", [
    ((0.2, 0.3), True),
    ((0.35, 0.1225), True),
    ((-0.3, 0.5), False),
    ((0.0, 0.5), True),       # on g1 = 0
    ((1.5, 0.0), False),      # outside the box
])
def test_is_feasible_rosenbrock(rosen, x, expected):
    assert is_feasible(np.array(x), rosen) is expected


def test_is_feasible_fish_origin_boundary(fish):
    assert is_feasible(np.zeros(2), fish)


def test_dimension_mismatch(rosen):
    with pytest.raises(ValueError):
        is_feasible(np.zeros(3), rosen)
    with pytest.raises(ValueError):
        penalized_objective(np.zeros(1), rosen)


def test_penalized_objective_examples(rosen):
    assert penalized_objective(np.array([0.35, 0.1225]), rosen) == pytest.approx(0.0, abs=1e-15)
    assert penalized_objective(np.array([-0.3, 0.5]), rosen) == 1e6
    # 0.15**2 + 100 * 0.26**2
    assert penalized_objective(np.array([0.2, 0.3]), rosen) == pytest.approx(6.7825, rel=1e-14)


box_points = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(np.array)


@given(box_points)
def test_feasible_iff_not_penalized(rosen, x):
    assert is_feasible(x, rosen) == (penalized_objective(x, rosen) != rosen.penalty_value)


@given(box_points, st.permutations([0, 1]))
def test_feasibility_ignores_constraint_order(rosen, x, order):
    gs = problems.SHARED_CONSTRAINTS.inequalities
    shuffled = Problem(rosen.bounds, rosen.objective, ConstraintSet(tuple(gs[i] for i in order)))
    assert is_feasible(x, shuffled) == is_feasible(x, rosen)


def test_non_vectorized_constraints_match():
    scalar = ConstraintSet((lambda x: x[0] + x[1] - 1.0,), vectorized=False)
    vector = ConstraintSet((lambda x: x[:, 0] + x[:, 1] - 1.0,))
    pts = np.random.default_rng(0).uniform(-1, 2, (50, 2))
    np.testing.assert_array_equal(scalar.evaluate(pts), vector.evaluate(pts))


def test_archive_best_and_ties():
    arch = Archive(duplicate_tol=1e-12)
    arch.append([0.0, 0.0], 3.0, 0, Source.INITIAL_DESIGN)
    arch.append([0.1, 0.0], 1.0, 0, Source.INITIAL_DESIGN)
    arch.append([0.2, 0.0], 1.0, 1, Source.INFILL)
    assert arch.best_index == 1
    arch.append([0.3, 0.0], 0.5, 2, Source.INFILL)
    assert arch.best_index == 3
    assert arch.x.shape == (4, 2)


def test_archive_rejects_duplicates_and_infeasible(rosen):
    arch = Archive.for_problem(rosen)
    arch.append([0.2, 0.3], 6.7825, 0, Source.INITIAL_DESIGN)
    with pytest.raises(DuplicatePointError):
        arch.append([0.2, 0.3 + 1e-14], 1.0, 1, Source.INFILL)
    with pytest.raises(InfeasiblePointError):
        arch.append([-0.3, 0.5], 1.0, 1, Source.INFILL)
    assert len(arch) == 1


@settings(max_examples=50)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=40))
def test_archive_best_non_increasing(values):
    arch = Archive()
    bests = []
    for i, f in enumerate(values):
        arch.append([float(i)], f, i, Source.INFILL)
        bests.append(arch.best.f)
        assert arch.best.f == min(values[: i + 1])
    assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))
