"""Kernel functions, Gram matrices and Gram centering.

Three kernels are supported:

* ``rbf``:        k(x, y) = exp(-||x - y||^2 / (2 sigma^2))
* ``linear``:     k(x, y) = <x, y>
* ``polynomial``: k(x, y) = (<x, y> + offset)^degree

The RBF bandwidth may be given numerically or left unresolved
(``"median-heuristic"``), in which case :func:`resolve_bandwidth` sets it to
the median pairwise Euclidean distance of the training rows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateDataError, DimensionMismatchError, ShapeError

KERNEL_KINDS = ("rbf", "linear", "polynomial")

MEDIAN_HEURISTIC = "median-heuristic"


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family plus its parameters.

    ``bandwidth_sigma`` applies to ``rbf`` only and may be a positive float
    or the string ``"median-heuristic"`` (the default) for data-driven
    resolution at fit time.  ``degree`` and ``offset`` apply to
    ``polynomial`` only.
    """

    kind: str = "rbf"
    bandwidth_sigma: float | str = MEDIAN_HEURISTIC
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ShapeError(f"unknown kernel kind {self.kind!r}")
        if isinstance(self.bandwidth_sigma, str):
            if self.bandwidth_sigma != MEDIAN_HEURISTIC:
                raise ShapeError(
                    f"bandwidth_sigma must be a positive number or "
                    f"{MEDIAN_HEURISTIC!r}, got {self.bandwidth_sigma!r}"
                )
        else:
            sigma = float(self.bandwidth_sigma)
            if not np.isfinite(sigma) or sigma <= 0.0:
                raise ShapeError(f"bandwidth_sigma must be > 0, got {sigma}")
            object.__setattr__(self, "bandwidth_sigma", sigma)
        if int(self.degree) != self.degree or self.degree < 1:
            raise ShapeError(f"degree must be an integer >= 1, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def resolved(self) -> bool:
        """True when the config needs no data-driven parameters."""
        return self.kind != "rbf" or not isinstance(self.bandwidth_sigma, str)


def median_heuristic_bandwidth(rows: np.ndarray) -> float:
    """Median pairwise Euclidean distance over the strict upper triangle.

    Raises
    ------
    DegenerateDataError
        If the median distance is zero (all rows effectively coincide).
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 2:
        raise DimensionMismatchError(
            f"need a (T, N) matrix with T >= 2, got shape {rows.shape}"
        )
    d2 = _sq_dists(rows, rows)
    iu = np.triu_indices(rows.shape[0], 1)
    med = float(np.median(np.sqrt(d2[iu])))
    if med == 0.0:
        raise DegenerateDataError(
            "median pairwise distance is zero; bandwidth heuristic undefined"
        )
    return med


def resolve_bandwidth(config: KernelConfig, rows: np.ndarray) -> KernelConfig:
    """Return a config whose RBF bandwidth is numeric, resolving if needed."""
    if config.resolved:
        return config
    return replace(config, bandwidth_sigma=median_heuristic_bandwidth(rows))


def _require_resolved(config: KernelConfig):
    if not config.resolved:
        raise ValueError(
            "kernel bandwidth is unresolved; call resolve_bandwidth first"
        )


def kernel_eval(config: KernelConfig, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    _require_resolved(config)
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatchError(
            f"vectors have different lengths: {x.shape[0]} vs {y.shape[0]}"
        )
    if config.kind == "linear":
        return float(x @ y)
    if config.kind == "polynomial":
        return float((x @ y + config.offset) ** config.degree)
    diff = x - y
    sigma = config.bandwidth_sigma
    return float(np.exp(-(diff @ diff) / (2.0 * sigma * sigma)))


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped to be non-negative."""
    sq_a = np.einsum("ij,ij->i", a, a)
    sq_b = np.einsum("ij,ij->i", b, b)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (a @ b.T)
    np.clip(d2, 0.0, None, out=d2)
    return d2


def cross_kernel(
    config: KernelConfig, rows_a: np.ndarray, rows_b: np.ndarray
) -> np.ndarray:
    """Kernel matrix ``K[i, j] = k(rows_a[i], rows_b[j])`` of shape (M, T)."""
    _require_resolved(config)
    a = np.asarray(rows_a, dtype=np.float64)
    b = np.asarray(rows_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatchError("expected 2-D row matrices")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"row dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    if config.kind == "linear":
        return a @ b.T
    if config.kind == "polynomial":
        return (a @ b.T + config.offset) ** config.degree
    sigma = config.bandwidth_sigma
    return np.exp(-_sq_dists(a, b) / (2.0 * sigma * sigma))


def gram_matrix(rows: np.ndarray, config: KernelConfig) -> np.ndarray:
    """Exactly symmetric ``(T, T)`` kernel matrix of the rows against themselves.

    The RBF Gram has an exact unit diagonal; linear and polynomial Grams are
    symmetrized as ``(K + K.T) / 2`` to wash out BLAS rounding asymmetry.
    """
    _require_resolved(config)
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionMismatchError("expected a 2-D row matrix")
    inner = rows @ rows.T
    inner = (inner + inner.T) / 2.0
    if config.kind == "linear":
        return inner
    if config.kind == "polynomial":
        return (inner + config.offset) ** config.degree
    sq = np.einsum("ij,ij->i", rows, rows)
    d2 = sq[:, None] + sq[None, :] - 2.0 * inner
    np.clip(d2, 0.0, None, out=d2)
    sigma = config.bandwidth_sigma
    gram = np.exp(-d2 / (2.0 * sigma * sigma))
    np.fill_diagonal(gram, 1.0)
    return gram


def center_gram(gram: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Double-center a Gram matrix in feature space.

    With row means ``r`` and grand mean ``g``, returns
    ``K - r[:, None] - r[None, :] + g`` along with ``(r, g)`` so the same
    centering can be applied to out-of-sample kernel rows later.
    """
    gram = np.asarray(gram, dtype=np.float64)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DimensionMismatchError(
            f"Gram matrix must be square, got {gram.shape}"
        )
    row_means = gram.mean(axis=1)
    grand_mean = float(row_means.mean())
    centered = gram - row_means[:, None] - row_means[None, :] + grand_mean
    return centered, row_means, grand_mean


def center_cross(
    cross: np.ndarray, row_means: np.ndarray, grand_mean: float
) -> np.ndarray:
    """Center out-of-sample kernel rows consistently with the training Gram."""
    cross = np.asarray(cross, dtype=np.float64)
    if cross.ndim != 2 or cross.shape[1] != row_means.shape[0]:
        raise DimensionMismatchError(
            f"cross-kernel shape {cross.shape} does not match "
            f"{row_means.shape[0]} training rows"
        )
    new_means = cross.mean(axis=1)
    return cross - new_means[:, None] - row_means[None, :] + grand_mean
