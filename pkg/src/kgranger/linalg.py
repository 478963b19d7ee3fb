"""Symmetric eigendecomposition used by the kernel PCA stage.

The workhorse is a cyclic Jacobi solver: full sweeps over the strict upper
triangle, one Givens rotation per off-diagonal entry, declared converged when
the off-diagonal Frobenius norm drops below ``tol_factor`` times the Frobenius
norm of the input.  Rotations preserve the Frobenius norm, so the threshold is
computed once.

Jacobi is O(n^3) per sweep with a large constant, so :func:`symmetric_eigh`
dispatches to LAPACK (``numpy.linalg.eigh``) above ``JACOBI_SIZE_LIMIT`` in
its default ``"auto"`` mode; either solver can also be forced by name.  Both
return eigenvalues in non-increasing order with eigenvectors as columns.
"""

from __future__ import annotations

import numpy as np

from ._accel import jit_compile
from .errors import EigenFailureError

#: Largest matrix the "auto" policy hands to the Jacobi solver.
JACOBI_SIZE_LIMIT = 128

DEFAULT_MAX_SWEEPS = 100
DEFAULT_TOL_FACTOR = 1e-12


def _jacobi_sweeps_loops(A, V, tol, max_sweeps):
    """Cyclic Jacobi sweeps over ``A`` in place; ``V`` accumulates rotations.

    Returns ``(sweeps_done, off_norm, converged)``.  Written with explicit
    loops so numba can compile it; the NumPy fallback below performs the same
    rotations with vectorized column/row updates.
    """
    n = A.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += 2.0 * A[i, j] * A[i, j]
        off = np.sqrt(off)
        if off <= tol:
            return sweep, off, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off += 2.0 * A[i, j] * A[i, j]
    off = np.sqrt(off)
    return max_sweeps, off, off <= tol


_jacobi_sweeps_jit = jit_compile(_jacobi_sweeps_loops)


def _jacobi_sweeps_numpy(A, V, tol, max_sweeps):
    """Pure NumPy twin of :func:`_jacobi_sweeps_loops` (same sweep order)."""
    n = A.shape[0]
    iu = np.triu_indices(n, 1)

    def off_norm():
        return float(np.sqrt(2.0) * np.linalg.norm(A[iu])) if n > 1 else 0.0

    for sweep in range(max_sweeps):
        off = off_norm()
        if off <= tol:
            return sweep, off, True
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                vcol_p = V[:, p].copy()
                vcol_q = V[:, q].copy()
                V[:, p] = c * vcol_p - s * vcol_q
                V[:, q] = s * vcol_p + c * vcol_q
    off = off_norm()
    return max_sweeps, off, off <= tol


def jacobi_eigh(
    matrix: np.ndarray,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    tol_factor: float = DEFAULT_TOL_FACTOR,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a symmetric matrix with cyclic Jacobi rotations.

    Parameters
    ----------
    matrix : (n, n) ndarray
        Symmetric matrix.  A copy is taken; the input is not modified.
    max_sweeps : int
        Hard cap on full sweeps before the solver gives up.
    tol_factor : float
        Converged when the off-diagonal Frobenius norm is at most
        ``tol_factor * ||matrix||_F``.

    Returns
    -------
    eigenvalues : (n,) ndarray
        In non-increasing order.
    eigenvectors : (n, n) ndarray
        Orthonormal, column ``k`` pairs with ``eigenvalues[k]``.

    Raises
    ------
    EigenFailureError
        If the sweep cap is reached without meeting the tolerance.
    """
    A = np.array(matrix, dtype=np.float64, order="C", copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    scale = np.abs(A).max() if n else 0.0
    if n > 1 and np.abs(A - A.T).max() > 1e-8 * (1.0 + scale):
        raise ValueError("matrix is not symmetric")
    V = np.eye(n)
    if n <= 1:
        return np.diag(A).copy(), V
    tol = tol_factor * float(np.linalg.norm(A))
    if _jacobi_sweeps_jit is not None:
        sweeps, off, converged = _jacobi_sweeps_jit(A, V, tol, max_sweeps)
    else:
        sweeps, off, converged = _jacobi_sweeps_numpy(A, V, tol, max_sweeps)
    if not converged:
        raise EigenFailureError(int(sweeps), float(off))
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], V[:, order]


def symmetric_eigh(
    matrix: np.ndarray,
    solver: str = "auto",
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a symmetric matrix, eigenvalues non-increasing.

    ``solver`` is one of ``"auto"`` (Jacobi up to :data:`JACOBI_SIZE_LIMIT`,
    LAPACK above), ``"jacobi"`` or ``"lapack"``.
    """
    if solver not in ("auto", "jacobi", "lapack"):
        raise ValueError(f"unknown eigensolver {solver!r}")
    A = np.asarray(matrix, dtype=np.float64)
    if solver == "auto":
        solver = "jacobi" if A.shape[0] <= JACOBI_SIZE_LIMIT else "lapack"
    if solver == "jacobi":
        return jacobi_eigh(A, max_sweeps=max_sweeps)
    values, vectors = np.linalg.eigh(A)
    return values[::-1].copy(), vectors[:, ::-1].copy()
