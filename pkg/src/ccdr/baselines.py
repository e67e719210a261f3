"""Classical embeddings: PCA, metric MDS, Fisher LDA, Laplacian eigenmaps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .graph import WeightMatrix
from .spectral import generalized_eig, sym_eig_desc, _fix_signs

# Eigenvalues at or below this are treated as zero energy in MDS.
MDS_EIG_TOL = 1e-10


@dataclass(frozen=True)
class LinearEmbedding:
    """Affine map x -> A (x - offset) with A of shape (m, d)."""

    A: np.ndarray
    offset: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.offset) @ self.A.T

    @property
    def m(self) -> int:
        return self.A.shape[0]


def pca_fit(points: np.ndarray, m: int) -> LinearEmbedding:
    """Top-m principal directions of the mean-centered covariance.

    Rows of A are orthonormal (A A^T = I) and the offset is the sample mean.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need an n x d matrix with n >= 2")
    n, d = X.shape
    if not 1 <= m <= d:
        raise ValueError("m must satisfy 1 <= m <= d = %d" % d)
    mean = X.mean(axis=0)
    Xc = X - mean
    C = (Xc.T @ Xc) / n
    sol = sym_eig_desc(C, m)
    return LinearEmbedding(A=sol.vectors.T.copy(), offset=mean)


def pca_energy_dim(points: np.ndarray, frac: float) -> int:
    """Smallest m whose top-m covariance eigenvalues hold >= frac of the energy."""
    if not 0 < frac <= 1:
        raise ValueError("frac must lie in (0, 1]")
    X = np.asarray(points, dtype=np.float64)
    Xc = X - X.mean(axis=0)
    vals = np.linalg.eigvalsh((Xc.T @ Xc) / X.shape[0])[::-1]
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise ValueError("covariance has no energy (all points identical)")
    cum = np.cumsum(vals) / total
    return int(np.searchsorted(cum, frac - 1e-12) + 1)


def mds_fit(D2: np.ndarray, m: int) -> np.ndarray:
    """Classical MDS coordinates from squared distances, shape (n, m).

    Double-centers B = -H D2 H / 2 with H = I - 11^T/n and keeps the top-m
    eigenpairs; eigenvalues at or below 1e-10 contribute zero columns, and
    meaningfully negative ones (a non-Euclidean input) trigger a warning
    before clamping.
    """
    D2 = np.asarray(D2, dtype=np.float64)
    if D2.ndim != 2 or D2.shape[0] != D2.shape[1]:
        raise ValueError("D2 must be square")
    n = D2.shape[0]
    if not 1 <= m <= n:
        raise ValueError("m must satisfy 1 <= m <= n = %d" % n)
    scale = max(1.0, float(np.abs(D2).max(initial=0.0)))
    if np.abs(D2 - D2.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("D2 must be symmetric")
    if np.any(D2 < 0):
        raise ValueError("D2 must be nonnegative")
    if np.abs(np.diag(D2)).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("D2 must have a zero diagonal")
    H = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * (H @ D2 @ H)
    B = (B + B.T) / 2.0
    if np.linalg.eigvalsh(B)[0] < -MDS_EIG_TOL * scale:
        warnings.warn(
            "squared distances are not Euclidean; negative eigenvalues clamped to zero",
            RuntimeWarning,
            stacklevel=2,
        )
    sol = sym_eig_desc(B, m)
    vals = sol.values
    pos = np.clip(vals, 0.0, None)
    pos[vals <= MDS_EIG_TOL] = 0.0
    return sol.vectors * np.sqrt(pos)[None, :]


def lda_fit(points: np.ndarray, labels: np.ndarray, m: int) -> LinearEmbedding:
    """Fisher discriminant directions: top-m generalized eigenvectors of
    the between-class scatter against the within-class scatter.

    Rows of A satisfy A C_W A^T = I within numerical tolerance. A singular
    within-class scatter falls back to a ridge of 1e-6 tr(C_W)/d with a
    warning. The offset is zero (projection y = A x).
    """
    X = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("points must be an n x d matrix")
    n, d = X.shape
    if labels.shape != (n,):
        raise ValueError("labels must have length n")
    if np.any(labels < 1):
        raise ValueError("LDA needs a class label (>= 1) on every point")
    if not 1 <= m <= d:
        raise ValueError("m must satisfy 1 <= m <= d = %d" % d)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("LDA needs at least two classes")
    mean = X.mean(axis=0)
    CW = np.zeros((d, d))
    CB = np.zeros((d, d))
    for k in classes:
        Xk = X[labels == k]
        mk = Xk.mean(axis=0)
        dk = Xk - mk
        CW += dk.T @ dk
        dm = (mk - mean)[:, None]
        CB += Xk.shape[0] * (dm @ dm.T)
    CW /= n
    CB /= n
    try:
        vals, vecs = scipy.linalg.eigh(CB, CW)
    except scipy.linalg.LinAlgError:
        tr = float(np.trace(CW))
        ridge = 1e-6 * (tr / d if tr > 0 else 1.0)
        warnings.warn(
            "within-class scatter is singular; adding ridge %g" % ridge,
            RuntimeWarning,
            stacklevel=2,
        )
        vals, vecs = scipy.linalg.eigh(CB, CW + ridge * np.eye(d))
    A = _fix_signs(vecs[:, ::-1][:, :m]).T
    return LinearEmbedding(A=A.copy(), offset=np.zeros(d))


def laplacian_eigenmap(W, m: int) -> np.ndarray:
    """Eigenmap coordinates: generalized eigenvectors 2..m+1 of (D - W, D).

    W may be a WeightMatrix or a symmetric nonnegative array; every vertex
    needs positive degree.
    """
    Wmat = W.matrix.toarray() if isinstance(W, WeightMatrix) else np.asarray(W, dtype=np.float64)
    n = Wmat.shape[0]
    if Wmat.shape != (n, n):
        raise ValueError("W must be square")
    if not 1 <= m <= n - 1:
        raise ValueError("m must satisfy 1 <= m <= n - 1 = %d" % (n - 1))
    deg = Wmat.sum(axis=1)
    lap = np.diag(deg) - Wmat
    sol = generalized_eig(lap, deg, m, exclude_ones=True)
    return sol.vectors.copy()
