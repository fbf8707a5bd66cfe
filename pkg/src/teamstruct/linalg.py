"""Dense linear-algebra helpers: symmetric pseudoinverses and condition-checked solves."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, get_lapack_funcs, lu_factor, lu_solve

from .errors import NoUniqueSolutionError

# Condition-estimate threshold beyond which a solve is reported as having
# no unique solution instead of silently returning garbage.
COND_LIMIT = 1e12

# Relative eigenvalue cutoff for pseudoinverse rank decisions.
PINV_RTOL = 1e-10


def sym_pinv(S: np.ndarray, rtol: float = PINV_RTOL) -> np.ndarray:
    """Pseudoinverse of a symmetric PSD matrix via eigendecomposition.

    Eigenvalues at or below ``rtol`` times the largest-magnitude eigenvalue
    are treated as exactly zero, so redundant noiseless observation rows stay
    well defined.
    """
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return np.zeros_like(S.T)
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    wmax = np.abs(w).max()
    if wmax == 0.0:
        return np.zeros_like(S)
    keep = w > rtol * wmax
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (V * inv) @ V.T


def solve_checked(a: np.ndarray, b: np.ndarray, what: str = "linear system"):
    """Solve ``a @ x = b`` and return ``(x, cond)``.

    ``cond`` is the 1-norm condition estimate from the LU factorization.
    Raises ``NoUniqueSolutionError`` when the estimate exceeds ``COND_LIMIT``
    or the factorization is exactly singular.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.shape[0]
    if n == 0:
        return np.zeros_like(b), 1.0
    anorm = np.linalg.norm(a, 1)
    with warnings.catch_warnings():
        # lu_factor warns on exactly singular input; gecon reports rcond = 0
        # for the same case, which we turn into an error below.
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a)
    (gecon,) = get_lapack_funcs(("gecon",), (lu,))
    rcond, _ = gecon(lu, anorm)
    cond = np.inf if rcond <= 0.0 else 1.0 / float(rcond)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NoUniqueSolutionError(
            f"{what} has no unique solution (condition estimate {cond:.3e})",
            condition=float(cond),
        )
    return lu_solve((lu, piv), b), float(cond)
