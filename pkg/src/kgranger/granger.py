"""Directed causality inference by leave-one-node-out prediction comparison.

The kernelized pipeline (``lskgc_infer``) scores every directed pair through
one *full* model and N *reduced* models:

1.  Normalize the panel (zero mean, unit variance per column).
2.  Map the T state vectors into kernel feature space, compute a kernel PCA
    basis there, and keep P components (fixed count or explained-variance
    threshold).
3.  Fit an order-L linear autoregression on the score series -- the scores
    are the state representation, so one regression predicts all components
    jointly.
4.  Map predicted scores back to observation space with a learned linear
    pre-image and record per-node residual variances ``sigma_full[j]``.
5.  For each candidate source node i, rebuild *everything* (bandwidth, Gram,
    eigenbasis, regression, pre-image) on the panel with column i removed,
    producing leave-out variances ``sigma_without_i[j]``.
6.  The causality index of i on j is the log variance ratio

        delta[i, j] = ln( sigma_without_i[j] / sigma_full[j] ),   i != j

    positive when removing i hurts the prediction of j.  The diagonal is 0.

``lsgc_infer`` is the same pipeline with a linear kernel (so the feature
space is the input space) and ``lasso_granger_infer`` is a direct sparse
VAR whose score for i -> j is the largest absolute lag coefficient.

The lag order is resolved once, on the full model, and reused for every
reduced model so that all variances refer to the same prediction horizon
and estimation sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import GciMatrix, TimeSeriesPanel, normalize
from .errors import (
    DimensionMismatchError,
    KgrangerError,
    ReducedModelDegenerateError,
    ShapeError,
    TooShortError,
)
from .kernels import KernelConfig
from .kpca import (
    KernelModel,
    choose_component_count,
    fit_kpca,
    fit_preimage,
    reconstruct,
    train_scores,
    truncate,
)
from .regression import (
    RegressionSpec,
    build_lagged_design,
    fit_linear,
    predict,
    select_order,
)

AUTO_LAG_RULES = ("auto_bic", "auto_aic")

DEFAULT_VARIANCE_FLOOR = 1e-12


def _default_regression() -> RegressionSpec:
    return RegressionSpec(method="ridge", lambda2=1e-3)


@dataclass(frozen=True)
class LskgcConfig:
    """Hyperparameters of the kernelized pipeline.

    ``components`` is either a fixed count (int >= 1, clamped to what the
    eigenvalue floor leaves available) or an explained-variance fraction in
    (0, 1).  ``lag`` is a fixed order or ``"auto_bic"``/``"auto_aic"``; the
    automatic rules search ``1..max_lag`` on the full model's score series.
    ``variance_floor`` guards the log-ratio against zero residual variance.
    """

    kernel: KernelConfig = field(default_factory=KernelConfig)
    components: int | float = 0.95
    lag: int | str = 2
    max_lag: int = 5
    regression: RegressionSpec = field(default_factory=_default_regression)
    variance_floor: float = DEFAULT_VARIANCE_FLOOR
    eigensolver: str = "auto"

    def __post_init__(self):
        if isinstance(self.components, bool) or not isinstance(
            self.components, (int, float, np.integer, np.floating)
        ):
            raise ShapeError("components must be an int count or float fraction")
        if isinstance(self.components, (int, np.integer)):
            if self.components < 1:
                raise ShapeError(
                    f"component count must be >= 1, got {self.components}"
                )
            object.__setattr__(self, "components", int(self.components))
        else:
            frac = float(self.components)
            if not 0.0 < frac < 1.0:
                raise ShapeError(
                    f"component fraction must lie in (0, 1), got {frac}"
                )
            object.__setattr__(self, "components", frac)
        if isinstance(self.lag, str):
            if self.lag not in AUTO_LAG_RULES:
                raise ShapeError(
                    f"lag must be an int or one of {AUTO_LAG_RULES}, "
                    f"got {self.lag!r}"
                )
        else:
            if int(self.lag) != self.lag or self.lag < 1:
                raise ShapeError(f"lag must be an integer >= 1, got {self.lag}")
            object.__setattr__(self, "lag", int(self.lag))
        if int(self.max_lag) != self.max_lag or self.max_lag < 1:
            raise ShapeError(f"max_lag must be an integer >= 1")
        object.__setattr__(self, "max_lag", int(self.max_lag))
        if not (np.isfinite(self.variance_floor) and self.variance_floor > 0.0):
            raise ShapeError(
                f"variance_floor must be > 0, got {self.variance_floor}"
            )
        if self.eigensolver not in ("auto", "jacobi", "lapack"):
            raise ShapeError(f"unknown eigensolver {self.eigensolver!r}")


@dataclass(frozen=True)
class FeatureVarModel:
    """The autoregression fitted on kernel PCA scores.

    ``coef`` has shape ``(P*lag, P)`` with the lag-1 block in the first P
    rows; ``coef_tensor`` reshapes it to ``(lag, source, target)``.
    ``fitted_scores`` holds the one-step score predictions for times
    ``lag..T-1``.
    """

    lag: int
    coef: np.ndarray
    intercept: np.ndarray
    fitted_scores: np.ndarray

    @property
    def n_components(self) -> int:
        return self.coef.shape[1]

    @property
    def coef_tensor(self) -> np.ndarray:
        p = self.n_components
        return self.coef.reshape(self.lag, p, p)


@dataclass(frozen=True)
class PipelineDiagnostics:
    """What one full pipeline pass actually did."""

    n_train: int
    n_nodes: int
    lag: int
    n_components: int
    eigenvalues: np.ndarray
    explained_variance_fraction: float
    bandwidth: float | None
    var_model: FeatureVarModel
    preimage_rmse: float
    score_residual_norms: np.ndarray

    def to_dict(self) -> dict:
        return {
            "n_train": self.n_train,
            "n_nodes": self.n_nodes,
            "lag": self.lag,
            "n_components": self.n_components,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "explained_variance_fraction": self.explained_variance_fraction,
            "bandwidth": self.bandwidth,
            "preimage_rmse": self.preimage_rmse,
            "score_residual_norms": [
                float(v) for v in self.score_residual_norms
            ],
        }


def _resolve_lag(scores: np.ndarray, config: LskgcConfig) -> int:
    if isinstance(config.lag, int):
        return config.lag
    criterion = "bic" if config.lag == "auto_bic" else "aic"
    return select_order(scores, config.max_lag, criterion, config.regression)


def _fit_scores(values: np.ndarray, config: LskgcConfig) -> KernelModel:
    model = fit_kpca(
        values, config.kernel, n_components=None, eigensolver=config.eigensolver
    )
    keep = choose_component_count(model, config.components)
    return truncate(model, keep)


def _predict_values(
    values: np.ndarray, config: LskgcConfig
) -> tuple[np.ndarray, PipelineDiagnostics]:
    """Full pipeline pass on a raw (already normalized) value matrix.

    Returns one-step predictions for rows ``L..T-1`` and diagnostics.
    """
    t = values.shape[0]
    model = _fit_scores(values, config)
    scores = train_scores(model)
    lag = _resolve_lag(scores, config)
    if t <= lag + 2:
        raise TooShortError(t, lag, "pipeline needs T > lag + 2")
    design = build_lagged_design(scores, lag)
    coef, intercept = fit_linear(design, config.regression)
    fitted_scores = predict(design, coef, intercept)
    # The pre-image is fitted on the same rows the regression predicts
    # (times lag..T-1), so reconstruction and prediction share a sample.
    preimage = fit_preimage(scores[lag:], values[lag:])
    predicted = reconstruct(preimage, fitted_scores)
    explained = (
        float(model.eigenvalues.sum() / model.total_variance)
        if model.total_variance > 0.0
        else 0.0
    )
    bandwidth = (
        float(model.config.bandwidth_sigma)
        if model.config.kind == "rbf"
        else None
    )
    diagnostics = PipelineDiagnostics(
        n_train=t,
        n_nodes=values.shape[1],
        lag=lag,
        n_components=model.n_components,
        eigenvalues=model.eigenvalues.copy(),
        explained_variance_fraction=explained,
        bandwidth=bandwidth,
        var_model=FeatureVarModel(
            lag=lag, coef=coef, intercept=intercept, fitted_scores=fitted_scores
        ),
        preimage_rmse=preimage.residual_rmse,
        score_residual_norms=np.linalg.norm(
            scores[lag:] - fitted_scores, axis=0
        ),
    )
    return predicted, diagnostics


def predict_panel(
    panel: TimeSeriesPanel, config: LskgcConfig
) -> tuple[np.ndarray, PipelineDiagnostics]:
    """One full pipeline pass over a normalized panel.

    Returns ``(predicted, diagnostics)`` where ``predicted`` holds one-step
    predictions for rows ``L..T-1`` in observation space.  The panel is
    expected to be normalized already (see :func:`kgranger.core.normalize`);
    the pass itself does not renormalize.
    """
    return _predict_values(panel.values, config)


def residual_variances(
    actual: np.ndarray, predicted: np.ndarray, floor: float = DEFAULT_VARIANCE_FLOOR
) -> np.ndarray:
    """Per-column sample variance (ddof=1) of prediction residuals.

    Values below ``floor`` are clamped to it so downstream log-ratios stay
    finite.
    """
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if actual.shape != predicted.shape:
        raise DimensionMismatchError(
            f"actual {actual.shape} and predicted {predicted.shape} differ"
        )
    if actual.ndim != 2 or actual.shape[0] < 2:
        raise DimensionMismatchError(
            "need at least 2 residual rows to estimate a variance"
        )
    resid = actual - predicted
    resid = resid - resid.mean(axis=0)
    var = np.einsum("ij,ij->j", resid, resid) / (actual.shape[0] - 1)
    return np.maximum(var, floor)


@dataclass(frozen=True)
class InferenceDiagnostics:
    """Diagnostics for a complete leave-one-out inference run."""

    full: PipelineDiagnostics
    reduced: tuple[PipelineDiagnostics, ...]
    floored_nodes_full: tuple[int, ...]
    floored_pairs_reduced: tuple[tuple[int, int], ...]

    def to_dict(self) -> dict:
        return {
            "full": self.full.to_dict(),
            "reduced": [d.to_dict() for d in self.reduced],
            "floored_nodes_full": list(self.floored_nodes_full),
            "floored_pairs_reduced": [
                list(p) for p in self.floored_pairs_reduced
            ],
        }


def lskgc_infer_with_diagnostics(
    panel: TimeSeriesPanel, config: LskgcConfig
) -> tuple[GciMatrix, InferenceDiagnostics]:
    """Kernelized leave-one-out inference, returning diagnostics as well."""
    normalized = normalize(panel)
    values = normalized.values
    n = values.shape[1]
    predicted, diag_full = _predict_values(values, config)
    lag = diag_full.lag
    sigma_full = residual_variances(
        values[lag:], predicted, config.variance_floor
    )
    floored_full = tuple(
        int(j) for j in np.nonzero(sigma_full <= config.variance_floor)[0]
    )
    # Reduced models reuse the lag resolved on the full model.
    reduced_config = replace(config, lag=lag)
    delta = np.zeros((n, n))
    reduced_diags = []
    floored_pairs = []
    for i in range(n):
        reduced_values = np.delete(values, i, axis=1)
        try:
            predicted_i, diag_i = _predict_values(reduced_values, reduced_config)
        except KgrangerError as exc:
            raise ReducedModelDegenerateError(i, str(exc)) from exc
        sigma_i = residual_variances(
            reduced_values[lag:], predicted_i, config.variance_floor
        )
        others = [j for j in range(n) if j != i]
        for pos, j in enumerate(others):
            if sigma_i[pos] <= config.variance_floor:
                floored_pairs.append((i, j))
            delta[i, j] = np.log(sigma_i[pos] / sigma_full[j])
        reduced_diags.append(diag_i)
    gci = GciMatrix(delta, panel.labels)
    diagnostics = InferenceDiagnostics(
        full=diag_full,
        reduced=tuple(reduced_diags),
        floored_nodes_full=floored_full,
        floored_pairs_reduced=tuple(floored_pairs),
    )
    return gci, diagnostics


def lskgc_infer(panel: TimeSeriesPanel, config: LskgcConfig) -> GciMatrix:
    """Kernelized leave-one-out causality scores for every directed pair."""
    return lskgc_infer_with_diagnostics(panel, config)[0]


def lsgc_infer(panel: TimeSeriesPanel, config: LskgcConfig) -> GciMatrix:
    """Linear-kernel variant: the same pipeline in plain input space."""
    linear = replace(config, kernel=KernelConfig(kind="linear"))
    return lskgc_infer(panel, linear)


def lasso_granger_infer(
    panel: TimeSeriesPanel,
    lag: int,
    lambda1: float,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> GciMatrix:
    """Sparse direct VAR baseline.

    Fits one L1-penalized regression per node on the lagged panel and scores
    ``i -> j`` by the largest absolute coefficient of node i across lags in
    node j's equation.  The diagonal is forced to zero (self-lags are part
    of the model but not reported as causality).
    """
    normalized = normalize(panel)
    values = normalized.values
    n = values.shape[1]
    design = build_lagged_design(values, lag)
    spec = RegressionSpec(
        method="lasso", lambda1=lambda1, tol=tol, max_iter=max_iter
    )
    coef, _ = fit_linear(design, spec)
    tensor = np.abs(coef.reshape(lag, n, n)).max(axis=0)
    np.fill_diagonal(tensor, 0.0)
    return GciMatrix(tensor, panel.labels)
