import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from feasbo.sampling import SamplerConfig, feasible_initial_design
from feasbo.surrogate import KrigingConfig, KrigingFitError, correlation, fit, pattern_search, predict


def dense_oracle(model, x):
    """Ordinary kriging predictor by explicit dense inversion."""
    X, y, th, nug = model.design, model.responses, model.theta, model.nugget
    diff = X[:, None, :] - X[None, :, :]
    R = np.exp(-(diff ** 2) @ th) + nug * np.eye(len(y))
    Ri = np.linalg.inv(R)
    one = np.ones(len(y))
    mu = one @ Ri @ y / (one @ Ri @ one)
    xn = (np.atleast_2d(x) - model.x_shift) / model.x_scale
    r = np.exp(-((xn[:, None, :] - X[None, :, :]) ** 2) @ th)
    return model.y_shift + model.y_scale * (mu + r @ Ri @ (y - mu * one)), mu


def test_constant_responses_give_constant_predictor():
    model = fit(np.array([[0.0], [1.0]]), np.array([3.5, 3.5]))
    xs = np.linspace(-2, 3, 41)[:, None]
    np.testing.assert_allclose(predict(model, xs), 3.5, atol=1e-12)


def test_symmetric_design_symmetric_prediction():
    x = np.array([[-1.0], [0.0], [1.0]])
    y = np.array([2.0, -1.0, 2.0])
    model = fit(x, y)
    t = np.linspace(0.01, 1.5, 25)[:, None]
    np.testing.assert_allclose(predict(model, t), predict(model, -t), atol=1e-10)
    oracle, _ = dense_oracle(model, t)
    np.testing.assert_allclose(predict(model, t), oracle, atol=1e-8)


def test_matches_dense_oracle():
    # well-separated design keeps R well conditioned so explicit inversion is accurate
    g = np.linspace(0.0, 1.0, 4)
    X = np.array([[a, b] for a in g for b in g])
    y = np.sin(4 * X[:, 0]) * np.cos(3 * X[:, 1]) + X[:, 0]
    model = fit(X, y)
    assert np.linalg.cond(model.chol @ model.chol.T) < 1e8
    probe = np.random.default_rng(1).uniform(0, 1, (50, 2))
    oracle, mu = dense_oracle(model, probe)
    assert model.mu == pytest.approx(mu, rel=1e-9, abs=1e-10)
    np.testing.assert_allclose(predict(model, probe), oracle, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_interpolates_training_points(rosen, rastr, seed):
    for prob in (rosen, rastr):
        X = feasible_initial_design(prob, SamplerConfig(), np.random.default_rng(seed))
        y = prob.objective(X)
        model = fit(X, y)
        assert np.max(np.abs(predict(model, X) - y)) <= 1e-6
        assert model.sigma2 >= 0
        assert np.all((model.theta >= 1e-2) & (model.theta <= 20))


def test_far_point_returns_mean():
    model = fit(np.array([[0.0, 0.0], [1.0, 0.5], [0.3, 0.9]]), np.array([1.0, 4.0, 2.0]))
    assert predict(model, np.array([1e3, -1e3])) == pytest.approx(model.mean, abs=1e-12)


def test_batch_equals_pointwise(rosen):
    X = feasible_initial_design(rosen, SamplerConfig(), np.random.default_rng(2))
    model = fit(X, rosen.objective(X))
    cand = np.random.default_rng(3).uniform(-1, 1, (4000, 2))
    batch = predict(model, cand)
    loop = np.array([predict(model, c) for c in cand])
    np.testing.assert_allclose(batch, loop, rtol=0, atol=1e-14)


def test_fit_deterministic(rosen):
    X = feasible_initial_design(rosen, SamplerConfig(), np.random.default_rng(4))
    y = rosen.objective(X)
    a, b = fit(X, y), fit(X, y)
    assert np.array_equal(a.theta, b.theta) and a.mu == b.mu and a.sigma2 == b.sigma2


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 100), st.floats(-50, 50), st.floats(0.1, 100), st.floats(-50, 50), st.integers(0, 1000))
def test_affine_rescaling_invariance(s1, t1, s2, t2, seed):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, (15, 2))
    y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2
    scale, shift = np.array([s1, s2]), np.array([t1, t2])
    m1, m2 = fit(X, y), fit(X * scale + shift, y)
    probe = rng.uniform(0, 1, (20, 2))
    np.testing.assert_allclose(predict(m1, probe), predict(m2, probe * scale + shift), rtol=0, atol=1e-8)


def test_larger_nugget_never_improves_interpolation(rosen):
    X = feasible_initial_design(rosen, SamplerConfig(), np.random.default_rng(6))
    y = rosen.objective(X)
    # smooth predictor: nugget excluded from the cross-correlation
    errs = []
    for nug in (1e-10, 1e-6, 1e-3, 1e-1):
        model = fit(X, y, KrigingConfig(nugget=nug))
        xn = (X - model.x_shift) / model.x_scale
        smooth = model.y_shift + model.y_scale * (model.mu + correlation(xn, model.design, model.theta) @ model.weights)
        errs.append(np.max(np.abs(smooth - y)))
    assert all(e2 >= e1 * (1 - 1e-9) for e1, e2 in zip(errs, errs[1:]))


def test_duplicate_points_raise_naming_pair():
    X = np.array([[0.0, 0.0], [0.5, 0.5], [0.5, 0.5], [1.0, 0.2]])
    with pytest.raises(KrigingFitError, match="points 1 and 2"):
        fit(X, np.array([1.0, 2.0, 3.0, 4.0]), KrigingConfig(nugget=0.0))


def test_fit_rejects_single_point():
    with pytest.raises(ValueError):
        fit(np.array([[0.0, 0.0]]), np.array([1.0]))


def test_pattern_search_finds_quadratic_minimum():
    f = lambda u: float((u[0] - 0.3) ** 2 + 2 * (u[1] + 0.7) ** 2)
    x, fx = pattern_search(f, np.array([1.0, 1.0]), np.array([-2.0, -2.0]), np.array([2.0, 2.0]),
                           0.5, 0.5, 1e-4, 10_000)
    np.testing.assert_allclose(x, [0.3, -0.7], atol=2e-4)


def test_dump_contains_hyperparameters():
    model = fit(np.array([[0.0], [1.0], [2.0]]), np.array([0.0, 1.0, 0.0]))
    text = model.dump()
    for key in ("theta", "mu", "sigma2", "x_shift", "x_scale", "y_shift", "y_scale"):
        assert key in text
