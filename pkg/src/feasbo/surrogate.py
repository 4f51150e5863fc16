"""Ordinary kriging with a Gaussian correlation function.

The model works in normalized coordinates: inputs and responses are shifted
and scaled to zero mean and unit variance over the training set. Correlation
parameters are chosen by maximizing the concentrated log-likelihood with a
deterministic coordinate pattern search in ``log10(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky
from scipy.spatial.distance import pdist, squareform


class KrigingFitError(RuntimeError):
    """The correlation matrix could not be factorized."""


@dataclass(frozen=True)
class KrigingConfig:
    theta_lower: float = 1e-2
    theta_upper: float = 20.0
    theta_start: float = 10.0
    nugget: float = 1e-10
    initial_step: float = 0.5
    shrink: float = 0.5
    min_step: float = 1e-3
    max_likelihood_evals: int = 500

    def __post_init__(self):
        if not 0 < self.theta_lower < self.theta_upper:
            raise ValueError("need 0 < theta_lower < theta_upper")
        if not self.theta_lower <= self.theta_start <= self.theta_upper:
            raise ValueError("theta_start outside theta bounds")
        if self.nugget < 0:
            raise ValueError("nugget must be nonnegative")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not 0 < self.min_step <= self.initial_step:
            raise ValueError("need 0 < min_step <= initial_step")


@dataclass(frozen=True)
class KrigingModel:
    design: np.ndarray          # normalized training inputs (m, n)
    responses: np.ndarray       # normalized training responses (m,)
    theta: np.ndarray
    mu: float
    sigma2: float
    chol: np.ndarray            # lower Cholesky factor of R + nugget*I
    weights: np.ndarray         # R^{-1} (y - mu 1)
    x_shift: np.ndarray
    x_scale: np.ndarray
    y_shift: float
    y_scale: float
    neg_log_likelihood: float
    nugget: float = 0.0

    @property
    def mean(self) -> float:
        """Constant mean in response units."""
        return self.y_shift + self.y_scale * self.mu

    def predict(self, x) -> np.ndarray:
        return predict(self, x)

    def dump(self) -> str:
        """Plain-text summary of the fitted hyperparameters, for debugging."""
        lines = [
            "theta " + " ".join(repr(float(t)) for t in self.theta),
            f"mu {self.mu!r}",
            f"sigma2 {self.sigma2!r}",
            "x_shift " + " ".join(repr(float(v)) for v in self.x_shift),
            "x_scale " + " ".join(repr(float(v)) for v in self.x_scale),
            f"y_shift {self.y_shift!r}",
            f"y_scale {self.y_scale!r}",
            f"m {len(self.responses)}",
        ]
        return "\n".join(lines) + "\n"


def _scale(values: np.ndarray) -> np.ndarray:
    scale = np.std(values, axis=0)
    return np.where(scale > 0, scale, 1.0)


def correlation(a: np.ndarray, b: np.ndarray, theta: np.ndarray, nugget: float = 0.0) -> np.ndarray:
    """Gaussian correlation ``exp(-sum_d theta_d (a_d - b_d)^2)`` between row sets.

    ``nugget`` is added only where two rows coincide exactly (nugget effect).
    """
    diff2 = (a[:, None, :] - b[None, :, :]) ** 2
    # elementwise reductions keep each row independent of the batch size
    r = np.exp(-np.sum(diff2 * theta, axis=-1))
    if nugget:
        r += nugget * (diff2.sum(axis=-1) == 0.0)
    return r


class _Likelihood:
    """Concentrated negative log-likelihood of ordinary kriging."""

    def __init__(self, design: np.ndarray, responses: np.ndarray, nugget: float):
        self.y = responses
        self.m = len(responses)
        self.nugget = nugget
        # squared coordinate differences for the upper triangle, per dimension
        self.sq = np.column_stack([pdist(design[:, [d]], "sqeuclidean") for d in range(design.shape[1])])
        self.evals = 0

    def corr_matrix(self, theta: np.ndarray) -> np.ndarray:
        R = squareform(np.exp(-self.sq @ theta))
        R[np.diag_indices_from(R)] = 1.0 + self.nugget
        return R

    def solve(self, theta: np.ndarray):
        self.evals += 1
        R = self.corr_matrix(theta)
        try:
            L = cholesky(R, lower=True, check_finite=False)
        except LinAlgError:
            return None
        ones = np.ones(self.m)
        Ri_one = cho_solve((L, True), ones, check_finite=False)
        Ri_y = cho_solve((L, True), self.y, check_finite=False)
        mu = float(ones @ Ri_y / (ones @ Ri_one))
        weights = Ri_y - mu * Ri_one
        resid = self.y - mu
        sigma2 = max(float(resid @ weights) / self.m, 0.0)
        logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
        if sigma2 > 0:
            nll = 0.5 * self.m * math.log(sigma2) + 0.5 * logdet
        else:
            nll = -math.inf
        return nll, L, mu, sigma2, weights

    def __call__(self, theta: np.ndarray) -> float:
        out = self.solve(theta)
        return math.inf if out is None else out[0]


def pattern_search(objective, start: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                   initial_step: float, shrink: float, min_step: float, max_evals: int):
    """Opportunistic coordinate search; halves the step after a failed sweep.

    Returns ``(best_point, best_value)``. Deterministic: coordinates are polled
    in order, plus direction before minus.
    """
    x = np.clip(np.asarray(start, dtype=float), lower, upper)
    fx = objective(x)
    evals = 1
    step = initial_step
    while step >= min_step and evals < max_evals:
        improved = False
        for d in range(len(x)):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[d] = min(max(x[d] + sign * step, lower[d]), upper[d])
                if trial[d] == x[d]:
                    continue
                ft = objective(trial)
                evals += 1
                if ft < fx:
                    x, fx = trial, ft
                    improved = True
                    break
        if not improved:
            step *= shrink
    return x, fx


def _closest_pair(points: np.ndarray):
    dists = squareform(pdist(points, "chebyshev"))
    np.fill_diagonal(dists, np.inf)
    i, j = np.unravel_index(np.argmin(dists), dists.shape)
    return int(min(i, j)), int(max(i, j)), float(dists[i, j])


def fit(x, y, config: Optional[KrigingConfig] = None, theta0=None) -> KrigingModel:
    """Fit an ordinary kriging model to training inputs ``x`` and responses ``y``.

    :param theta0: optional starting correlation parameters (normalized
        coordinates), e.g. the optimum of a previous fit.
    """
    config = config or KrigingConfig()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    m, n = x.shape
    if m < 2:
        raise ValueError("kriging needs at least two training points")
    if len(y) != m:
        raise ValueError("x and y lengths differ")

    x_shift, x_scale = x.mean(axis=0), _scale(x)
    y_shift, y_scale = float(y.mean()), float(_scale(y))
    design = (x - x_shift) / x_scale
    responses = (y - y_shift) / y_scale

    lik = _Likelihood(design, responses, config.nugget)
    lo = np.full(n, math.log10(config.theta_lower))
    hi = np.full(n, math.log10(config.theta_upper))
    if theta0 is None:
        start = np.full(n, math.log10(config.theta_start))
    else:
        start = np.log10(np.clip(np.asarray(theta0, dtype=float), config.theta_lower, config.theta_upper))

    log_theta, best = pattern_search(
        lambda u: lik(10.0 ** u), start, lo, hi,
        config.initial_step, config.shrink, config.min_step, config.max_likelihood_evals,
    )
    if not math.isfinite(best) and best != -math.inf:
        i, j, gap = _closest_pair(x)
        raise KrigingFitError(
            f"correlation matrix singular for every theta tried; closest pair is "
            f"points {i} and {j} (inf-norm gap {gap:.3g})"
        )
    theta = 10.0 ** log_theta
    nll, L, mu, sigma2, weights = lik.solve(theta)
    return KrigingModel(
        design=design, responses=responses, theta=theta, mu=mu, sigma2=sigma2,
        chol=L, weights=weights, x_shift=x_shift, x_scale=x_scale,
        y_shift=y_shift, y_scale=y_scale, neg_log_likelihood=nll, nugget=config.nugget,
    )


def predict(model: KrigingModel, x) -> np.ndarray:
    """Kriging mean ``mu + r(x)^T R^{-1} (y - mu 1)`` in response units.

    The nugget belongs to the covariance at zero separation, so the model
    reproduces its training responses exactly (up to rounding). Accepts a single point (returns a scalar)
    or a matrix of points.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xn = (np.atleast_2d(x) - model.x_shift) / model.x_scale
    r = correlation(xn, model.design, model.theta, model.nugget)
    out = model.y_shift + model.y_scale * (model.mu + np.sum(r * model.weights, axis=-1))
    return out[0] if single else out

