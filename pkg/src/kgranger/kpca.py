"""Kernel principal component analysis with a learned linear pre-image map.

Fitting eigendecomposes the double-centered Gram matrix scaled by the sample
count, ``C = K_tilde / T``, whose eigenvalues equal the feature-space
covariance eigenvalues.  An eigenpair ``(lambda_p, u_p)`` of ``C`` yields the
expansion coefficients

    alpha_p = u_p / sqrt(T * lambda_p)

so that the implied feature-space directions have unit norm:
``alpha_p' K_tilde alpha_p = 1``.  Scores of a (centered) kernel row vector
``k`` are then ``k @ alpha_p``.  With a linear kernel this reproduces
ordinary PCA scores of the mean-centered data exactly.

Eigenvalues at or below ``1e-10 * lambda_max`` (or non-positive) are
discarded.  If nothing survives -- e.g. all training rows identical -- the
model degenerates to a single component with zero eigenvalue and zero
coefficients, so every projection is the zero score vector.

Because feature space has no usable inverse map, reconstruction back to input
space is *learned*: a ridge-regularized linear map from training scores to
training rows (:func:`fit_preimage`), applied to predicted scores by
:func:`reconstruct`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, RankDeficientWarning, ShapeError
from .kernels import (
    KernelConfig,
    center_cross,
    center_gram,
    cross_kernel,
    gram_matrix,
    resolve_bandwidth,
)
from .linalg import symmetric_eigh

EIGEN_FLOOR_FACTOR = 1e-10
PREIMAGE_JITTER = 1e-10


@dataclass(frozen=True)
class KernelModel:
    """A fitted kernel PCA basis.

    Attributes
    ----------
    config : KernelConfig
        Fully resolved kernel (numeric bandwidth for RBF).
    train_rows : (T, N) ndarray
        Training rows, kept for out-of-sample kernel evaluation.
    row_means : (T,) ndarray
    grand_mean : float
        Centering statistics of the training Gram matrix.
    eigenvalues : (P,) ndarray
        Non-increasing eigenvalues of the scaled centered Gram ``K_tilde/T``.
    alphas : (T, P) ndarray
        Expansion coefficients; column ``p`` is ``u_p / sqrt(T lambda_p)``.
    total_variance : float
        ``trace(K_tilde) / T``, the total feature-space variance.
    """

    config: KernelConfig
    train_rows: np.ndarray
    row_means: np.ndarray
    grand_mean: float
    eigenvalues: np.ndarray
    alphas: np.ndarray
    total_variance: float

    @property
    def n_train(self) -> int:
        return self.train_rows.shape[0]

    @property
    def n_components(self) -> int:
        return self.alphas.shape[1]


def fit_kpca(
    rows: np.ndarray,
    config: KernelConfig,
    n_components: int | None = None,
    eigensolver: str = "auto",
) -> KernelModel:
    """Fit a kernel PCA basis on ``rows``.

    Parameters
    ----------
    rows : (T, N) ndarray
        Training rows (observations as rows), T >= 2.
    config : KernelConfig
        May carry an unresolved bandwidth; it is resolved here.
    n_components : int or None
        Number of components to keep.  ``None`` keeps every component above
        the eigenvalue floor.  Asking for more than survive the floor keeps
        the survivors and emits :class:`RankDeficientWarning`.
    eigensolver : str
        Passed through to :func:`kgranger.linalg.symmetric_eigh`.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise DimensionMismatchError(
            f"need a (T, N) matrix with T >= 2, got shape {rows.shape}"
        )
    t = rows.shape[0]
    if n_components is not None and not (1 <= n_components <= t):
        raise ValueError(
            f"n_components must be in [1, {t}], got {n_components}"
        )
    config = resolve_bandwidth(config, rows)
    gram = gram_matrix(rows, config)
    centered, row_means, grand_mean = center_gram(gram)
    total_variance = float(np.trace(centered)) / t
    values, vectors = symmetric_eigh(centered / t, solver=eigensolver)
    lam_max = values[0] if values.size else 0.0
    floor = EIGEN_FLOOR_FACTOR * max(lam_max, 0.0)
    usable = int(np.sum(values > floor)) if lam_max > 0.0 else 0
    if usable == 0:
        # Degenerate Gram: one null component, all scores identically zero.
        warnings.warn(
            "centered Gram has no eigenvalue above the floor; "
            "keeping a single zero component",
            RankDeficientWarning,
            stacklevel=2,
        )
        return KernelModel(
            config=config,
            train_rows=rows.copy(),
            row_means=row_means,
            grand_mean=grand_mean,
            eigenvalues=np.zeros(1),
            alphas=np.zeros((t, 1)),
            total_variance=total_variance,
        )
    keep = usable if n_components is None else min(n_components, usable)
    if n_components is not None and usable < n_components:
        warnings.warn(
            f"requested {n_components} components but only {usable} "
            f"eigenvalues exceed the floor; keeping {usable}",
            RankDeficientWarning,
            stacklevel=2,
        )
    lam = values[:keep]
    alphas = vectors[:, :keep] / np.sqrt(t * lam)[None, :]
    return KernelModel(
        config=config,
        train_rows=rows.copy(),
        row_means=row_means,
        grand_mean=grand_mean,
        eigenvalues=lam.copy(),
        alphas=alphas,
        total_variance=total_variance,
    )


def project(model: KernelModel, rows: np.ndarray) -> np.ndarray:
    """Project rows onto the fitted basis, returning ``(M, P)`` scores.

    Out-of-sample rows are centered with the *training* Gram statistics, so
    projecting the training rows reproduces the training scores and
    projecting the training mean of a linear-kernel model gives zero scores.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.train_rows.shape[1]:
        raise DimensionMismatchError(
            f"rows have dimension {rows.shape[1] if rows.ndim == 2 else '?'}, "
            f"model expects {model.train_rows.shape[1]}"
        )
    cross = cross_kernel(model.config, rows, model.train_rows)
    centered = center_cross(cross, model.row_means, model.grand_mean)
    return centered @ model.alphas


def train_scores(model: KernelModel) -> np.ndarray:
    """Scores of the training rows themselves, shape ``(T, P)``."""
    return project(model, model.train_rows)


def truncate(model: KernelModel, n_components: int) -> KernelModel:
    """Keep only the leading ``n_components`` components of a fitted model."""
    if not (1 <= n_components <= model.n_components):
        raise ValueError(
            f"n_components must be in [1, {model.n_components}], "
            f"got {n_components}"
        )
    if n_components == model.n_components:
        return model
    return KernelModel(
        config=model.config,
        train_rows=model.train_rows,
        row_means=model.row_means,
        grand_mean=model.grand_mean,
        eigenvalues=model.eigenvalues[:n_components].copy(),
        alphas=model.alphas[:, :n_components].copy(),
        total_variance=model.total_variance,
    )


def choose_component_count(model: KernelModel, rule: int | float) -> int:
    """Resolve a component-count rule against a fitted model.

    An integer rule keeps ``min(rule, available)`` components.  A float rule
    in (0, 1) keeps the smallest P whose eigenvalues explain at least that
    fraction of the total feature-space variance (all retained components if
    the threshold is never reached).
    """
    if isinstance(rule, bool):
        raise ShapeError("component rule must be an int or a float")
    if isinstance(rule, (int, np.integer)):
        if rule < 1:
            raise ShapeError(f"component count must be >= 1, got {rule}")
        return min(int(rule), model.n_components)
    ratio = float(rule)
    if not 0.0 < ratio < 1.0:
        raise ShapeError(
            f"variance-fraction rule must lie in (0, 1), got {ratio}"
        )
    if model.total_variance <= 0.0:
        return 1
    explained = np.cumsum(model.eigenvalues) / model.total_variance
    above = np.nonzero(explained >= ratio)[0]
    if above.size == 0:
        return model.n_components
    return int(above[0]) + 1


@dataclass(frozen=True)
class PreImageMap:
    """Affine map from score space back to input space.

    ``reconstruct(scores) = scores @ gamma.T + intercept``.
    """

    gamma: np.ndarray  # (N, P)
    intercept: np.ndarray  # (N,)
    residual_rmse: float


def fit_preimage(scores: np.ndarray, targets: np.ndarray) -> PreImageMap:
    """Learn the linear pre-image map by ridge-regularized least squares.

    Solves, in centered coordinates, ``(H_c' H_c + jitter I) B = H_c' Y_c``
    with ``jitter = 1e-10`` on the score Gram, then restores the intercept
    ``ybar - gamma @ hbar``.  The jitter keeps the solve defined when scores
    are rank-deficient (e.g. the degenerate all-zero-score model, which
    yields a constant map onto the column means).
    """
    scores = np.asarray(scores, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if scores.ndim != 2 or targets.ndim != 2:
        raise DimensionMismatchError("scores and targets must be 2-D")
    if scores.shape[0] != targets.shape[0]:
        raise DimensionMismatchError(
            f"scores have {scores.shape[0]} rows, targets {targets.shape[0]}"
        )
    h_bar = scores.mean(axis=0)
    y_bar = targets.mean(axis=0)
    h_c = scores - h_bar
    y_c = targets - y_bar
    gram = h_c.T @ h_c
    gram[np.diag_indices_from(gram)] += PREIMAGE_JITTER
    coef = np.linalg.solve(gram, h_c.T @ y_c)  # (P, N)
    gamma = coef.T
    intercept = y_bar - gamma @ h_bar
    fitted = scores @ coef + intercept
    residual_rmse = float(np.sqrt(np.mean((targets - fitted) ** 2)))
    return PreImageMap(gamma=gamma, intercept=intercept, residual_rmse=residual_rmse)


def reconstruct(preimage: PreImageMap, scores: np.ndarray) -> np.ndarray:
    """Map score rows back to input space with a fitted pre-image map."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] != preimage.gamma.shape[1]:
        raise DimensionMismatchError(
            f"scores have {scores.shape[1] if scores.ndim == 2 else '?'} "
            f"columns, pre-image map expects {preimage.gamma.shape[1]}"
        )
    return scores @ preimage.gamma.T + preimage.intercept
