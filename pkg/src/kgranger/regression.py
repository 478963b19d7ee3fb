"""Lagged linear regression: design construction, fitting, order selection.

A vector autoregression of order L on a ``(T, D)`` series is fitted as a
single multi-target linear regression.  The design stacks lagged copies of
the series, lag-1 block first::

    X[t - L] = [ y[t-1], y[t-2], ..., y[t-L] ]      (row for target y[t])

Fitting minimizes, per target column (``m`` = number of design rows),

    (1/(2m)) ||y - X w||^2 + lambda1 ||w||_1 + (lambda2/2) ||w||^2

OLS and ridge solve the normal equations directly (with a tiny jitter on the
diagonal for conditioning); lasso and elastic net run cyclic coordinate
descent with a soft-threshold update.  All penalties exclude the intercept,
which is handled by centering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import jit_compile
from .errors import (
    DimensionMismatchError,
    NoConvergenceError,
    ShapeError,
    TooShortError,
)

NORMAL_EQ_JITTER = 1e-12
MSE_FLOOR = 1e-12

REGRESSION_METHODS = ("ols", "ridge", "lasso", "elastic_net")
ORDER_CRITERIA = ("bic", "aic")


@dataclass(frozen=True)
class RegressionSpec:
    """Which estimator to use and its penalties.

    ``lambda1`` (L1) must be positive for ``lasso``/``elastic_net`` and zero
    otherwise; ``lambda2`` (L2) must be zero for ``ols``/``lasso``.  ``tol``
    is the coordinate-descent stop threshold on the largest coefficient
    change per sweep; ``max_iter`` caps the number of sweeps.
    """

    method: str = "ols"
    lambda1: float = 0.0
    lambda2: float = 0.0
    tol: float = 1e-8
    max_iter: int = 1000

    def __post_init__(self):
        if self.method not in REGRESSION_METHODS:
            raise ShapeError(f"unknown regression method {self.method!r}")
        for name in ("lambda1", "lambda2"):
            val = float(getattr(self, name))
            if not np.isfinite(val) or val < 0.0:
                raise ShapeError(f"{name} must be finite and >= 0, got {val}")
            object.__setattr__(self, name, val)
        if self.method in ("lasso", "elastic_net") and self.lambda1 <= 0.0:
            raise ShapeError(f"{self.method} requires lambda1 > 0")
        if self.method == "ridge" and self.lambda2 <= 0.0:
            raise ShapeError("ridge requires lambda2 > 0")
        if self.method in ("ols", "ridge") and self.lambda1 != 0.0:
            raise ShapeError(f"{self.method} does not use lambda1")
        if self.method in ("ols", "lasso") and self.lambda2 != 0.0:
            raise ShapeError(f"{self.method} does not use lambda2")
        if not (np.isfinite(self.tol) and self.tol > 0.0):
            raise ShapeError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ShapeError(f"max_iter must be an integer >= 1")
        object.__setattr__(self, "tol", float(self.tol))
        object.__setattr__(self, "max_iter", int(self.max_iter))


@dataclass(frozen=True)
class LaggedDesign:
    """A lagged design matrix with its aligned targets.

    ``X`` has shape ``(T - lag, dim * lag)`` with the lag-1 block in the
    first ``dim`` columns; ``targets`` has shape ``(T - lag, K)``.
    """

    X: np.ndarray
    targets: np.ndarray
    lag: int
    dim: int

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        if X.ndim != 2 or targets.ndim != 2:
            raise DimensionMismatchError("X and targets must be 2-D")
        if self.lag < 1 or self.dim < 1:
            raise DimensionMismatchError("lag and dim must be >= 1")
        if X.shape[1] != self.dim * self.lag:
            raise DimensionMismatchError(
                f"X has {X.shape[1]} columns, expected dim*lag = "
                f"{self.dim * self.lag}"
            )
        if X.shape[0] != targets.shape[0]:
            raise DimensionMismatchError(
                f"X has {X.shape[0]} rows, targets {targets.shape[0]}"
            )
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "targets", targets)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]


def build_lagged_design(series: np.ndarray, lag: int) -> LaggedDesign:
    """Stack ``lag`` delayed copies of a ``(T, D)`` series, lag-1 block first.

    Row ``r`` of the design predicts ``series[lag + r]`` from
    ``series[lag + r - 1], ..., series[lag + r - lag]``.

    Raises
    ------
    TooShortError
        If ``T <= lag`` (no target rows would remain).
    """
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2:
        raise DimensionMismatchError("series must be 2-D")
    t, d = series.shape
    if lag < 1:
        raise DimensionMismatchError(f"lag must be >= 1, got {lag}")
    if t <= lag:
        raise TooShortError(t, lag, "no rows left after lagging")
    blocks = [series[lag - ell: t - ell] for ell in range(1, lag + 1)]
    return LaggedDesign(
        X=np.hstack(blocks), targets=series[lag:].copy(), lag=lag, dim=d
    )


def _cd_sweeps(G, C, lam1, lam2, tol, max_iter):
    """Cyclic coordinate descent on the precomputed Gram system.

    ``G = Xc'Xc / m`` (D, D) and ``C = Xc'Yc / m`` (D, K).  Returns
    ``(W, sweeps, worst_delta, converged)`` where ``sweeps`` and
    ``worst_delta`` describe the worst target column.
    """
    d_dim, k_dim = C.shape
    W = np.zeros((d_dim, k_dim))
    worst_sweeps = 0
    worst_delta = 0.0
    converged = True
    for k in range(k_dim):
        w = np.zeros(d_dim)
        ok = False
        sweeps = 0
        max_delta = 0.0
        for it in range(max_iter):
            sweeps = it + 1
            max_delta = 0.0
            for j in range(d_dim):
                denom = G[j, j] + lam2
                if denom <= 0.0:
                    continue
                rho = C[j, k] - np.dot(G[j], w) + G[j, j] * w[j]
                if rho > lam1:
                    w_new = (rho - lam1) / denom
                elif rho < -lam1:
                    w_new = (rho + lam1) / denom
                else:
                    w_new = 0.0
                delta = abs(w_new - w[j])
                if delta > max_delta:
                    max_delta = delta
                w[j] = w_new
            if max_delta < tol:
                ok = True
                break
        W[:, k] = w
        if not ok:
            converged = False
        if sweeps > worst_sweeps:
            worst_sweeps = sweeps
            worst_delta = max_delta
    return W, worst_sweeps, worst_delta, converged


_cd_sweeps_jit = jit_compile(_cd_sweeps)


def lambda1_max(design: LaggedDesign, fit_intercept: bool = True) -> float:
    """Smallest L1 penalty that zeroes every coefficient.

    ``||Xc' (y - ybar)||_inf / m`` over all target columns; at or above this
    value coordinate descent returns the all-zero solution.
    """
    X, Y = design.X, design.targets
    m = X.shape[0]
    if fit_intercept:
        Xc = X - X.mean(axis=0)
        Yc = Y - Y.mean(axis=0)
    else:
        Xc, Yc = X, Y
    return float(np.abs(Xc.T @ Yc).max() / m)


def fit_linear(
    design: LaggedDesign,
    spec: RegressionSpec,
    fit_intercept: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Fit coefficients for every target column at once.

    Returns
    -------
    coef : (dim*lag, K) ndarray
    intercept : (K,) ndarray
        Zero when ``fit_intercept`` is False.

    Raises
    ------
    NoConvergenceError
        If coordinate descent exhausts ``spec.max_iter`` sweeps on any
        target column.
    """
    X, Y = design.X, design.targets
    m = X.shape[0]
    if fit_intercept:
        x_mean = X.mean(axis=0)
        y_mean = Y.mean(axis=0)
        Xc = X - x_mean
        Yc = Y - y_mean
    else:
        x_mean = np.zeros(X.shape[1])
        y_mean = np.zeros(Y.shape[1])
        Xc, Yc = X, Y
    gram = (Xc.T @ Xc) / m
    corr = (Xc.T @ Yc) / m
    if spec.method in ("ols", "ridge"):
        A = gram.copy()
        idx = np.diag_indices_from(A)
        A[idx] += spec.lambda2 + NORMAL_EQ_JITTER
        coef = np.linalg.solve(A, corr)
    else:
        gram = np.ascontiguousarray(gram)
        corr = np.ascontiguousarray(corr)
        impl = _cd_sweeps_jit if _cd_sweeps_jit is not None else _cd_sweeps
        coef, sweeps, delta, converged = impl(
            gram, corr, spec.lambda1, spec.lambda2, spec.tol, spec.max_iter
        )
        if not converged:
            raise NoConvergenceError(int(sweeps), float(delta))
    intercept = y_mean - x_mean @ coef
    return coef, intercept


def predict(
    design: LaggedDesign, coef: np.ndarray, intercept: np.ndarray
) -> np.ndarray:
    """Apply fitted coefficients to the design rows."""
    coef = np.asarray(coef, dtype=np.float64)
    if coef.ndim != 2 or coef.shape[0] != design.X.shape[1]:
        raise DimensionMismatchError(
            f"coef has shape {coef.shape}, design has {design.X.shape[1]} columns"
        )
    return design.X @ coef + np.asarray(intercept, dtype=np.float64)


def select_order(
    series: np.ndarray,
    max_lag: int,
    criterion: str = "bic",
    spec: RegressionSpec | None = None,
) -> int:
    """Pick a lag order by BIC or AIC on a common estimation sample.

    Every candidate L in ``1..max_lag`` is scored on the same ``T - max_lag``
    target rows (the sub-design of the max-lag design), so scores are
    comparable:

        score(L) = m*D*ln(max(MSE_pooled, 1e-12)) + penalty * k

    with ``k = D^2 L + D`` parameters, ``penalty = ln(m)`` for BIC and 2 for
    AIC.  Ties resolve to the smaller order.

    Raises
    ------
    TooShortError
        If ``T <= max_lag + 1``: the common sample needs at least two rows
        so that centering leaves some signal to score.
    """
    if criterion not in ORDER_CRITERIA:
        raise ValueError(f"unknown order criterion {criterion!r}")
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 2:
        raise DimensionMismatchError("series must be 2-D")
    t, d = series.shape
    if max_lag < 1:
        raise DimensionMismatchError(f"max_lag must be >= 1, got {max_lag}")
    if t <= max_lag + 1:
        raise TooShortError(t, max_lag, "order selection needs T > max_lag + 1")
    if spec is None:
        spec = RegressionSpec(method="ols")
    full = build_lagged_design(series, max_lag)
    m = full.n_rows
    n_obs = m * d
    best_order = 1
    best_score = np.inf
    for lag in range(1, max_lag + 1):
        sub = LaggedDesign(
            X=full.X[:, : d * lag], targets=full.targets, lag=lag, dim=d
        )
        coef, intercept = fit_linear(sub, spec)
        resid = sub.targets - predict(sub, coef, intercept)
        mse = max(float(np.mean(resid**2)), MSE_FLOOR)
        k_params = d * d * lag + d
        if criterion == "bic":
            penalty = np.log(m)
        else:
            penalty = 2.0
        score = n_obs * np.log(mse) + penalty * k_params
        if score < best_score:
            best_score = score
            best_order = lag
    return best_order
