"""Small dense linear-algebra kernels for the path tracer.

Everything here operates on tiny matrices (4n x 4n and 4n x (4n+1) with n
rarely above 4), so the kernels favour explicit, checkable behaviour over
scalability: pivoted LU with a relative singularity threshold, determinant
sign read off the factorization, and the Moore-Penrose right inverse formed
through the normal equations M M^T.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

__all__ = [
    "SingularMatrixError",
    "lu_solve",
    "det_sign",
    "pinv_right_apply",
    "euclidean_norm",
]

# Relative pivot magnitude below which a matrix is treated as singular.
PIVOT_RTOL = 1e-13


class SingularMatrixError(ValueError):
    """A linear system was singular to working tolerance."""


def _factor(mat: np.ndarray):
    """Pivoted LU factorization with a relative singularity check.

    Returns (lu, piv, singular) where `singular` is True when the smallest
    pivot falls below PIVOT_RTOL times the largest matrix entry.
    """
    with warnings.catch_warnings():
        # scipy warns on exactly-zero pivots; the caller decides via the
        # tolerance check instead.
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(mat, check_finite=False)
    scale = np.abs(mat).max() if mat.size else 0.0
    diag = np.abs(np.diag(lu))
    singular = scale == 0.0 or not np.all(diag >= PIVOT_RTOL * scale)
    return lu, piv, singular


def _as_matrix(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {mat.shape}")
    return mat


def lu_solve(mat, rhs) -> np.ndarray:
    """Solve the square system mat @ y = rhs by pivoted LU.

    Raises SingularMatrixError when a pivot is below the relative threshold.
    """
    mat = _as_matrix(mat)
    rhs = np.asarray(rhs, dtype=float)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    if rhs.shape != (mat.shape[0],):
        raise ValueError(
            f"right-hand side length {rhs.shape} does not match matrix {mat.shape}"
        )
    lu, piv, singular = _factor(mat)
    if singular:
        raise SingularMatrixError("matrix is singular to working tolerance")
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def det_sign(mat) -> int:
    """Sign of det(mat) in {-1, 0, +1}, 0 meaning singular to tolerance.

    Computed as the parity of the row interchanges times the product of the
    pivot signs, so no determinant magnitude is ever formed.
    """
    mat = _as_matrix(mat)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    lu, piv, singular = _factor(mat)
    if singular:
        return 0
    swaps = int(np.sum(piv != np.arange(mat.shape[0])))
    sign = -1 if swaps % 2 else 1
    for d in np.diag(lu):
        if d < 0:
            sign = -sign
    return sign


def pinv_right_apply(mat, rhs) -> np.ndarray:
    """Minimum-norm solution of the underdetermined system mat @ y = rhs.

    `mat` must be wide (rows < cols) with full row rank; the result is
    mat^T (mat mat^T)^(-1) rhs.  Raises SingularMatrixError when the normal
    matrix mat mat^T is singular to tolerance (row-rank deficiency).
    """
    mat = _as_matrix(mat)
    rhs = np.asarray(rhs, dtype=float)
    rows, cols = mat.shape
    if rows >= cols:
        raise ValueError(f"matrix must be wide (rows < cols), got shape {mat.shape}")
    if rhs.shape != (rows,):
        raise ValueError(f"right-hand side length {rhs.shape} does not match {rows} rows")
    gram = mat @ mat.T
    try:
        y = lu_solve(gram, rhs)
    except SingularMatrixError:
        raise SingularMatrixError("normal matrix is rank deficient") from None
    return mat.T @ y


def euclidean_norm(v) -> float:
    """Plain l2 norm."""
    return float(np.linalg.norm(np.asarray(v, dtype=float)))
