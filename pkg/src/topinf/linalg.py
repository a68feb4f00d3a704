"""Dense linear-algebra wrappers with explicit failure contracts.

Thin layers over LAPACK (through NumPy/SciPy) that pin down the behaviors
the rest of the package relies on:

* :func:`cholesky_upper` -- upper-triangular factor with a relative pivot
  tolerance, raising :class:`~topinf.errors.NotPositiveDefiniteError` with
  the offending pivot index;
* :func:`solve_sym` -- symmetric solve with symmetric diagonal
  equilibration, one step of iterative refinement, and a condition
  estimate, raising :class:`~topinf.errors.SingularMatrixError` with a rank
  estimate when the matrix is singular to working precision;
* :func:`lstsq_min_norm` -- SVD-based minimum-norm least squares with a
  fixed relative singular-value cutoff;
* :func:`thin_svd` -- economy-size SVD.

Equilibration and refinement are exact algebraic reformulations; they do
not change the solution being computed, only its floating-point accuracy.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .errors import NotPositiveDefiniteError, SingularMatrixError

__all__ = ["cholesky_upper", "solve_sym", "lstsq_min_norm", "thin_svd"]

#: Relative pivot tolerance for Cholesky (pivot^2 vs. largest diagonal entry).
CHOLESKY_PIVOT_RTOL = 1e-13

#: Reciprocal-condition threshold below which a symmetric solve is refused.
SOLVE_RCOND_FLOOR = 1e-14

#: Relative singular-value cutoff for minimum-norm least squares.
LSTSQ_RCOND = 1e-12


def _require_square(a: np.ndarray, name: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")


def _require_symmetric(a: np.ndarray, name: str, rtol: float = 1e-8) -> None:
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return
    if np.max(np.abs(a - a.T)) > rtol * scale:
        raise ValueError(f"{name} is not symmetric to relative tolerance {rtol}")


def cholesky_upper(m: np.ndarray, pivot_rtol: float = CHOLESKY_PIVOT_RTOL) -> np.ndarray:
    """Upper-triangular ``R`` with ``R.T @ R == m`` for symmetric ``m``.

    Parameters
    ----------
    m : ndarray, shape (n, n)
        Symmetric positive definite matrix.
    pivot_rtol : float
        A factorization is rejected when any squared pivot falls at or
        below ``pivot_rtol`` times the largest diagonal entry of ``m``.

    Raises
    ------
    NotPositiveDefiniteError
        If factorization breaks down or produces a negligible pivot; the
        exception carries the 0-based index of the first bad pivot.
    """
    m = np.asarray(m, dtype=float)
    _require_square(m, "m")
    _require_symmetric(m, "m")
    c, info = lapack.dpotrf(m, lower=0, overwrite_a=0)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (pivot {info - 1} failed)",
            pivot_index=int(info - 1),
        )
    if info < 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrf")
    r = np.triu(c)
    pivots = np.diag(r) ** 2
    floor = pivot_rtol * float(np.max(np.diag(m)))
    bad = np.nonzero(pivots <= floor)[0]
    if bad.size:
        raise NotPositiveDefiniteError(
            f"pivot {bad[0]} is negligible relative to the diagonal "
            f"(pivot^2={pivots[bad[0]]:.3e} <= {floor:.3e})",
            pivot_index=int(bad[0]),
        )
    return r


def _rank_estimate(a: np.ndarray, rtol: float = 1e-12) -> int:
    eigvals = np.abs(la.eigvalsh(a))
    top = float(np.max(eigvals)) if eigvals.size else 0.0
    if top == 0.0:
        return 0
    return int(np.count_nonzero(eigvals > rtol * top))


def solve_sym(
    b: np.ndarray,
    c: np.ndarray,
    rcond_floor: float = SOLVE_RCOND_FLOOR,
) -> tuple[np.ndarray, float]:
    """Solve ``b @ x = c`` for symmetric ``b``; return ``(x, cond_estimate)``.

    The system is symmetrically equilibrated by the square roots of its
    row infinity-norms, factorized once, and the solution is polished with
    a single iterative-refinement step.  The reported condition number is
    a reciprocal 1-norm LAPACK estimate of the equilibrated matrix.

    Raises
    ------
    SingularMatrixError
        If the equilibrated matrix has an estimated reciprocal condition
        number at or below ``rcond_floor``.  The exception carries a rank
        estimate obtained from the eigenvalues of the equilibrated matrix.
    """
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    _require_square(b, "b")
    _require_symmetric(b, "b")
    if c.shape[0] != b.shape[0]:
        raise ValueError(
            f"right-hand side has leading dimension {c.shape[0]}, expected {b.shape[0]}"
        )
    if not np.all(np.isfinite(b)) or not np.all(np.isfinite(c)):
        raise ValueError("non-finite entries in the linear system")

    row_max = np.max(np.abs(b), axis=1)
    scale = np.sqrt(np.where(row_max > 0.0, row_max, 1.0))
    bs = b / np.outer(scale, scale)
    cs = (c.T / scale).T

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", la.LinAlgWarning)
        lu, piv = la.lu_factor(bs)
    anorm = float(np.max(np.abs(bs).sum(axis=0))) if bs.size else 0.0
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0:
        raise ValueError(f"illegal value in argument {-info} of dgecon")
    if not np.isfinite(rcond) or rcond <= rcond_floor:
        cond = float("inf") if rcond <= 0.0 else 1.0 / float(rcond)
        raise SingularMatrixError(
            f"matrix is singular to working precision (rcond={float(rcond):.3e})",
            rank_estimate=_rank_estimate(bs),
            cond_estimate=cond,
        )

    y = la.lu_solve((lu, piv), cs)
    y += la.lu_solve((lu, piv), cs - bs @ y)
    x = (y.T / scale).T
    return x, 1.0 / float(rcond)


def lstsq_min_norm(
    a: np.ndarray,
    b: np.ndarray,
    rcond: float = LSTSQ_RCOND,
) -> tuple[np.ndarray, int, np.ndarray]:
    """Minimum-norm least-squares solution of ``a @ x ~= b``.

    SVD-based; singular values at or below ``rcond`` times the largest are
    treated as zero.  Returns ``(x, rank, singular_values)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(
            f"right-hand side has leading dimension {b.shape[0]}, expected {a.shape[0]}"
        )
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise ValueError("non-finite entries in the least-squares system")
    x, _, rank, sv = np.linalg.lstsq(a, b, rcond=rcond)
    return x, int(rank), sv


def thin_svd(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Economy-size SVD ``a = u @ diag(s) @ vt`` with descending ``s``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite entries in the matrix")
    return np.linalg.svd(a, full_matrices=False)
