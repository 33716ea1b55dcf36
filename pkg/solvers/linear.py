"""
Linear Solve
LU with partial pivoting: dense LAPACK below the dense threshold,
SuperLU on CSC storage above it. Real and complex systems alike.
"""

#####################################
# Import Modules
#####################################

import warnings

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from utils.errors import SingularMatrixError
from utils.utils_config import get_dense_threshold

PIVOT_TOLERANCE = 1e-12

#####################################
# Helper Functions
#####################################


def _scale(A) -> float:
    if sp.issparse(A):
        return float(abs(A).max()) if A.nnz else 0.0
    return float(np.max(np.abs(A))) if A.size else 0.0


def _check_pivots(diagonal: np.ndarray, scale: float, rows: np.ndarray) -> None:
    """Raise on the first pivot below PIVOT_TOLERANCE * max|A|."""
    threshold = PIVOT_TOLERANCE * scale
    small = np.flatnonzero(~(np.abs(diagonal) > threshold))
    if small.size:
        row = int(rows[small[0]])
        raise SingularMatrixError(f"numerically singular matrix (pivot at row {row})", row)


def _solve_dense(A: np.ndarray, b: np.ndarray, scale: float) -> np.ndarray:
    with warnings.catch_warnings():
        # exact zero pivots are reported by _check_pivots below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    # row i of U was swapped in from row piv[i]; undo the swaps to name it
    order = np.arange(A.shape[0])
    for i, p in enumerate(piv):
        order[i], order[p] = order[p], order[i]
    _check_pivots(np.diag(lu), scale, order)
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def _solve_sparse(A, b: np.ndarray, scale: float) -> np.ndarray:
    try:
        factor = splu(sp.csc_matrix(A))
    except RuntimeError:
        raise SingularMatrixError("matrix is exactly singular", -1) from None
    # perm_r maps original rows to factor rows
    original = np.empty_like(factor.perm_r)
    original[factor.perm_r] = np.arange(factor.perm_r.size)
    _check_pivots(factor.U.diagonal(), scale, original)
    return factor.solve(b)


#####################################
# Public Functions
#####################################


def linear_solve(A, b, dense_threshold: int = None) -> np.ndarray:
    """Solve A x = b; A may be a numpy array or any scipy sparse matrix."""
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"linear_solve needs a square matrix, got {A.shape}")
    b = np.asarray(b)
    if n == 0:
        return np.zeros(0, dtype=b.dtype)
    dtype = np.result_type(A.dtype, b.dtype)
    scale = _scale(A)
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero (pivot at row 0)", 0)
    if dense_threshold is None:
        dense_threshold = get_dense_threshold()
    if n < dense_threshold:
        dense = A.toarray() if sp.issparse(A) else np.asarray(A)
        return _solve_dense(dense.astype(dtype), b.astype(dtype), scale)
    return _solve_sparse(A.astype(dtype), b.astype(dtype), scale)
