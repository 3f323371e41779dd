"""Dense matrix helpers used throughout the package.

Matrices and vectors are plain ``numpy`` arrays (real or complex); the
functions here add the input validation and conventions the rest of the
package relies on: a scale-invariant numerical rank and minimum-norm least
squares.
"""

import numpy as np

DEFAULT_RANK_TOL = 1e-9


def check_finite(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as an ndarray, raising ValueError on non-finite entries."""
    a = np.asarray(a)
    if a.size and not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def numerical_rank(m: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values of ``m`` above ``tol`` times the largest.

    The tolerance is relative, so the result is invariant under rescaling of
    the data. A zero (or empty) matrix has rank 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = check_finite(np.atleast_2d(m))
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm solution of ``min_x ||a x - b||_2``."""
    a = check_finite(np.atleast_2d(a), "a")
    b = check_finite(np.asarray(b, dtype=a.dtype if np.iscomplexobj(a) else float), "b")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"a has {a.shape[0]} rows but b has length {b.shape[0]}")
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x
