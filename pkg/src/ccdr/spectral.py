"""Symmetric and degree-weighted generalized eigensolvers.

The generalized problem Lap u = lambda Dg u with a positive diagonal Dg is
reduced by the similarity transform S = Dg^{-1/2} Lap Dg^{-1/2}; the
standard symmetric solve on S is then mapped back through u = Dg^{-1/2} v.
Returned eigenvectors are Dg-orthonormal and sign-fixed so the
largest-magnitude entry is positive (ties by lowest index).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

# Below this gap the eigenvector basis inside a cluster is not unique.
GAP_TOL = 1e-10


@dataclass(frozen=True)
class EigenSolution:
    """Ascending eigenpairs of (Lap, Dg).

    values has shape (count,), vectors (p, count) with column l the
    eigenvector of values[l], and metric_diag the Dg diagonal used for
    orthonormalization (ones for the plain symmetric solver).
    """

    values: np.ndarray
    vectors: np.ndarray
    metric_diag: np.ndarray


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive."""
    U = U.copy()
    idx = np.argmax(np.abs(U), axis=0)
    flip = U[idx, np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    return U


def _check_symmetric(M: np.ndarray, what: str) -> None:
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if np.abs(M - M.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("%s must be symmetric" % what)


def _warn_small_gaps(values: np.ndarray) -> None:
    if values.size >= 2 and np.any(np.diff(values) < GAP_TOL):
        warnings.warn(
            "eigenvalue gap below %g in the selected band; "
            "eigenvector choice is not unique" % GAP_TOL,
            RuntimeWarning,
            stacklevel=3,
        )


def generalized_eig(
    lap: np.ndarray,
    deg: np.ndarray,
    count: int,
    *,
    exclude_ones: bool = False,
) -> EigenSolution:
    """Smallest `count` eigenpairs of Lap u = lambda Dg u, Dg = diag(deg).

    Requires a symmetric Lap and strictly positive deg. Eigenvectors come
    back Dg-orthonormal (u^T Dg u = 1) in ascending eigenvalue order.

    With exclude_ones=True the solve is restricted to the complement of the
    constant vector (u^T Dg 1 = 0): the constant direction is shifted above
    the Laplacian band before the solve. On a connected graph this returns
    exactly the eigenpairs after the constant one; on a disconnected graph,
    where the kernel basis is otherwise arbitrary, it keeps the returned
    band Dg-orthogonal to the constant.
    """
    lap = np.asarray(lap, dtype=np.float64)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError("lap must be square")
    p = lap.shape[0]
    deg = np.asarray(deg, dtype=np.float64).ravel()
    if deg.shape != (p,):
        raise ValueError("deg must have length %d" % p)
    bad = np.nonzero(deg <= 0)[0]
    if bad.size:
        raise ValueError("vertex %d has nonpositive degree" % int(bad[0]))
    limit = p - 1 if exclude_ones else p
    if not 1 <= count <= limit:
        raise ValueError(
            "count must satisfy 1 <= count <= %d, got %d" % (limit, count)
        )
    _check_symmetric(lap, "lap")
    s = 1.0 / np.sqrt(deg)
    S = s[:, None] * lap * s[None, :]
    S = (S + S.T) / 2.0
    if exclude_ones:
        # Shift the constant direction above every eigenvalue; the max
        # absolute row sum bounds the spectral radius.
        v1 = np.sqrt(deg)
        v1 /= np.linalg.norm(v1)
        shift = 1.0 + float(np.abs(S).sum(axis=1).max())
        S = S + shift * np.outer(v1, v1)
    vals, vecs = eigh(S, subset_by_index=(0, count - 1))
    U = _fix_signs(s[:, None] * vecs)
    _warn_small_gaps(vals)
    return EigenSolution(values=vals, vectors=U, metric_diag=deg.copy())


def sym_eig_desc(M: np.ndarray, count: int) -> EigenSolution:
    """Largest `count` eigenpairs of a symmetric matrix, descending order."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("M must be square")
    p = M.shape[0]
    if not 1 <= count <= p:
        raise ValueError("count must satisfy 1 <= count <= %d, got %d" % (p, count))
    _check_symmetric(M, "M")
    vals, vecs = eigh((M + M.T) / 2.0, subset_by_index=(p - count, p - 1))
    vals = vals[::-1].copy()
    vecs = _fix_signs(vecs[:, ::-1])
    _warn_small_gaps(vals[::-1])
    return EigenSolution(values=vals, vectors=vecs, metric_diag=np.ones(p))
