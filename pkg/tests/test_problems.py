import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from feasbo import problems
from feasbo.domain import Bounds
from feasbo.problems import (
    FishKinematics,
    RastriginInstance,
    RosenbrockParams,
    fish_constraints,
    fish_midline,
    make_rotation_matrix,
    rastrigin,
    rosenbrock,
    shared_constraints,
)


@pytest.mark.parametrize("x, expected", [
    ((0.35, 0.1225), 0.0),
    ((0.35, 0.0), 1.500625),
    ((0.0, 0.0), 0.1225),
])
def test_rosenbrock_values(x, expected):
    assert rosenbrock(np.array(x)) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_rosenbrock_nonnegative(x1, x2):
    assert rosenbrock(np.array([x1, x2])) >= 0.0


@pytest.mark.parametrize("x, expected", [
    ((0.2, 0.3), (-0.1, -0.1)),
    ((0.35, 0.1225), (-0.07125, -0.0725)),
    ((0.0, 0.5), (0.0, -0.1)),
])
def test_shared_constraints(x, expected):
    np.testing.assert_allclose(shared_constraints(np.array(x)), expected, atol=1e-15)


def test_shared_feasible_x1_range_matches_quadratic_roots():
    # 0.4 - x1 <= 0.5 - 2.5 x1^2  <=>  2.5 x1^2 - x1 - 0.1 <= 0
    roots = np.sort(np.roots([2.5, -1.0, -0.1]).real)
    np.testing.assert_allclose(problems.shared_feasible_x1_range(), roots, rtol=1e-14)
    lo, hi = problems.shared_feasible_x1_range()
    for x1 in (lo, hi):
        x2 = 0.4 - x1
        assert x2 == pytest.approx(0.5 - 2.5 * x1 ** 2, abs=1e-14)
    # just outside the interval the band is empty
    for x1 in (lo - 1e-6, hi + 1e-6):
        assert 0.4 - x1 > 0.5 - 2.5 * x1 ** 2


def test_rastrigin_examples():
    inst = RastriginInstance(np.zeros(2), np.eye(2), cec_offset=False)
    assert rastrigin(np.array([1.0, 1.0]), inst) == pytest.approx(-348.0, abs=1e-12)
    M = make_rotation_matrix(3)
    o = np.array([0.1, 0.4])
    assert rastrigin(o, RastriginInstance(o, M, cec_offset=True)) == -330.0
    assert rastrigin(o, RastriginInstance(o, M, cec_offset=False)) == -350.0


@pytest.mark.parametrize("seed", range(10))
def test_rotation_condition_number(seed):
    s = np.linalg.svd(make_rotation_matrix(seed), compute_uv=False)
    assert s[0] / s[-1] == pytest.approx(2.0, abs=1e-10)
    assert s[-1] == pytest.approx(1.0, abs=1e-12)


def test_rotation_deterministic():
    assert np.array_equal(make_rotation_matrix(11), make_rotation_matrix(11))


def test_rastrigin_even_in_rotation_sign():
    M = make_rotation_matrix(5)
    a = RastriginInstance(np.zeros(2), M)
    b = RastriginInstance(np.zeros(2), -M)
    xs = np.random.default_rng(0).uniform(-1, 1, (100, 2))
    np.testing.assert_allclose(rastrigin(xs, a), rastrigin(xs, b), rtol=0, atol=1e-12)


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_rastrigin_bounded_below_by_bias(x1, x2):
    inst = problems.make_rastrigin_instance(0)
    assert rastrigin(np.array([x1, x2]), inst) >= inst.bias - 1e-12


def test_rastrigin_shift_is_feasible():
    for seed in range(5):
        inst = problems.make_rastrigin_instance(seed)
        assert problems.SHARED_CONSTRAINTS.satisfied(inst.shift[None, :])[0]


@pytest.mark.parametrize("x, expected, feasible", [
    ((0.0, 0.0), (0.0, -0.03, 0.0), True),
    ((0.05, -0.05), (-0.0035, -0.03, -0.05), True),
    ((0.1, -0.05), (0.004, 0.02, -0.05), False),
])
def test_fish_constraints(x, expected, feasible):
    g = fish_constraints(np.array(x), 0.3)
    np.testing.assert_allclose(g, expected, atol=1e-15)
    assert bool(np.all(g <= 0)) is feasible


def test_fish_midline_head_and_tail():
    kin = FishKinematics(0.1, -0.05)
    for t in np.linspace(0, 3, 31):
        assert fish_midline(kin, 0.0, t) == 0.0
    tail = fish_midline(kin, kin.L, 0.0)
    assert tail == pytest.approx((kin.x1 + kin.x2) * math.sin(2 * math.pi / kin.wavelength), abs=1e-12)
    # independent high-precision evaluation
    mpmath.mp.dps = 30
    oracle = mpmath.mpf("0.05") * mpmath.sin(2 * mpmath.pi / mpmath.mpf("1.1"))
    assert tail == pytest.approx(float(oracle), abs=1e-15)
    assert tail == pytest.approx(-0.027032, abs=5e-7)


@given(st.floats(0, 0.3), st.floats(-5, 5), st.floats(-1, 1), st.floats(-1, 1))
def test_fish_midline_periodic(p, t, x1, x2):
    kin = FishKinematics(x1, x2, freq=1.0)
    assert fish_midline(kin, p, t + kin.period) == pytest.approx(fish_midline(kin, p, t), abs=1e-12)


def test_kinematics_snapshots_structure():
    kin = FishKinematics(0.1, -0.05)
    rows = problems.kinematics_snapshots(kin)
    assert len(rows) == 11 * 101
    snaps = {}
    for p, k, t, y in rows:
        snaps.setdefault(k, []).append((p, t, y))
    assert sorted(snaps) == list(range(11))
    for k, pts in snaps.items():
        assert pts[0][0] == 0.0 and pts[0][2] == 0.0
        assert pts[-1][0] == pytest.approx(0.3)
        assert all(t == pytest.approx(k / 10) for _, t, _ in pts)


def test_landscape_grid(rosen):
    rows = problems.landscape(rosen, resolution=11)
    assert len(rows) == 121
    for x1, x2, f, feas in rows:
        assert feas == int(rosen.is_feasible(np.array([x1, x2])))
        assert (f == 1e6) == (not feas)


def test_landscape_rejects_bad_resolution(rosen):
    with pytest.raises(ValueError):
        problems.landscape(rosen, resolution=1)


def test_problems_pickle(rosen, rastr):
    import pickle
    for prob in (rosen, rastr, problems.fish_problem(objective=RosenbrockParams())):
        clone = pickle.loads(pickle.dumps(prob))
        x = np.array([0.2, 0.3])
        assert clone.objective(x) == prob.objective(x)
        assert clone.is_feasible(np.array([0.0, 0.0])) == prob.is_feasible(np.array([0.0, 0.0]))


def test_default_box_contains_feasible_region():
    lo, hi = problems.shared_feasible_x1_range()
    b = Bounds(*problems.DEFAULT_BOX)
    assert b.lower[0] < lo and hi < b.upper[0]
