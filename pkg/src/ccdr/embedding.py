"""Class-constrained spectral embedding with an out-of-sample extension.

Class centers are added to the point graph as pseudo-nodes: the augmented
adjacency is

    G = [[0,   C  ],
         [C^T, bW ]]        (L + n vertices, b = beta)

with C the class indicator and W the heat-kernel weights. Writing
Dg = diag(G 1) and Lap = Dg - G, the embedding stacks class centers and
point coordinates into Zhat (m rows, L + n columns) and minimizes
tr(Zhat Lap Zhat^T) subject to Zhat Dg 1 = 0 and Zhat Dg Zhat^T = I. The
minimizer's rows are the generalized eigenvectors u_2 .. u_{m+1} of
Lap u = lambda Dg u; u_1 (the constant vector) is discarded, which is what
enforces the centering constraint.

A new point x with optional label c is embedded without refitting through

    f_l(x, c) = [1(c != 0) z_c(l) + b sum_j K(x, x_j) y_j(l)]
                / [(1 - lambda_l) (1(c != 0) + b sum_j K(x, x_j))]

which reproduces the training coordinates when K reproduces the point's
weight row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import LabeledDataset, ClassIndicator, make_indicator, class_counts
from .graph import WeightMatrix, knn_graph, heat_weights, median_eps, kernel_row, kernel_rows
from .spectral import generalized_eig

# Retained eigenvalues must stay clear of 1 for the extension denominator.
LAMBDA_TOL = 1e-9
RESIDUAL_TOL = 1e-8

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class AugmentedLaplacian:
    """Dense Laplacian of the center-augmented graph.

    Vertices 0..L-1 are class centers, vertices L..L+n-1 the data points.
    """

    lap: np.ndarray
    deg: np.ndarray
    num_classes: int
    n_points: int
    beta: float


@dataclass(frozen=True)
class CcdrModel:
    """Fitted embedding: class centers, point coordinates, and spectrum.

    centers has shape (L, m) with row k the center of class k + 1; embedding
    has shape (n, m) with row i the coordinates of training point i;
    eigenvalues holds lambda_2 .. lambda_{m+1} in ascending order.
    """

    centers: np.ndarray
    embedding: np.ndarray
    eigenvalues: np.ndarray
    beta: float
    eps: float
    k: int
    m: int
    train_points: np.ndarray
    train_labels: np.ndarray
    num_classes: int
    class_sizes: np.ndarray

    @property
    def n(self) -> int:
        return self.train_points.shape[0]

    @property
    def d(self) -> int:
        return self.train_points.shape[1]


def build_augmented(C, W, beta: float) -> AugmentedLaplacian:
    """Assemble Dg and Lap = Dg - G for the center-augmented graph.

    C may be a ClassIndicator or an (L, n) 0/1 array; W a WeightMatrix or a
    symmetric (n, n) array. Every augmented row must have positive degree:
    an empty class or an unlabeled point with no weighted edge is an error.
    """
    if isinstance(C, ClassIndicator):
        C = C.matrix
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2:
        raise ValueError("C must be an L x n matrix")
    L, n = C.shape
    if isinstance(W, WeightMatrix):
        W = W.matrix.toarray()
    else:
        W = np.asarray(W, dtype=np.float64)
    if W.shape != (n, n):
        raise ValueError("W must be n x n with n matching C")
    if not np.isfinite(beta) or beta < 0:
        raise ValueError("beta must be finite and nonnegative")
    p = L + n
    G = np.zeros((p, p))
    G[:L, L:] = C
    G[L:, :L] = C.T
    G[L:, L:] = beta * W
    deg = G.sum(axis=1)
    bad = np.nonzero(deg <= 0)[0]
    if bad.size:
        r = int(bad[0])
        what = (
            "class %d is empty" % (r + 1)
            if r < L
            else "point %d is unlabeled and has no weighted edge" % (r - L)
        )
        raise ValueError("augmented row %d has zero degree: %s" % (r, what))
    lap = np.diag(deg) - G
    return AugmentedLaplacian(
        lap=lap, deg=deg, num_classes=L, n_points=n, beta=float(beta)
    )


def fit(
    ds: LabeledDataset,
    k: int = 4,
    eps: float | None = None,
    beta: float = 1.0,
    m: int = 2,
    eps_scale: float = 1.0,
) -> CcdrModel:
    """Fit the constrained embedding on a labeled dataset.

    eps = None selects the median of squared kNN edge distances, scaled by
    eps_scale. Requires beta >= 0, m >= 1 and m + 1 <= L + n, and every class
    must have at least one labeled point; beta = 0 additionally needs a fully
    labeled dataset so every augmented-graph row keeps positive degree.
    Raises when a retained eigenvalue reaches 1 (then m is too large or beta
    too small for this graph).
    """
    if not isinstance(ds, LabeledDataset):
        raise TypeError("ds must be a LabeledDataset")
    if not np.isfinite(beta) or beta < 0:
        raise ValueError("beta must be finite and nonnegative")
    if m < 1:
        raise ValueError("m must be at least 1")
    L, n = ds.num_classes, ds.n
    if m + 1 > L + n:
        raise ValueError("m + 1 must not exceed L + n = %d" % (L + n))
    counts = class_counts(ds)
    if np.any(counts == 0):
        raise ValueError("class %d has no labeled points" % (int(np.argmin(counts)) + 1))
    graph = knn_graph(ds.points, k)
    if eps is None:
        eps = median_eps(graph, ds.points) * float(eps_scale)
    if not eps > 0:
        raise ValueError("eps must be positive")
    W = heat_weights(graph, ds.points, eps)
    C = make_indicator(ds)
    aug = build_augmented(C, W, beta)
    # The constant vector u_1 never enters: the solve is restricted to its
    # complement, which on a connected graph is the same as discarding it.
    sol = generalized_eig(aug.lap, aug.deg, m, exclude_ones=True)
    lam = sol.values.copy()
    if lam.max() >= 1.0 - LAMBDA_TOL:
        raise ValueError(
            "retained eigenvalue %.6g reaches 1; decrease m or increase beta"
            % float(lam.max())
        )
    U = sol.vectors
    model = CcdrModel(
        centers=np.ascontiguousarray(U[:L].copy()),
        embedding=np.ascontiguousarray(U[L:].copy()),
        eigenvalues=lam,
        beta=float(beta),
        eps=float(eps),
        k=int(k),
        m=int(m),
        train_points=ds.points.copy(),
        train_labels=ds.labels.copy(),
        num_classes=L,
        class_sizes=counts.copy(),
    )
    res = constraint_residuals(model, W=W, C=C)
    worst = max(res.values())
    if worst > RESIDUAL_TOL:
        raise RuntimeError(
            "fitted model violates its constraints (residual %.3g)" % worst
        )
    return model


def _stack(model: CcdrModel) -> np.ndarray:
    """Zhat, the m x (L + n) stacked solution [centers^T | embedding^T]."""
    return np.concatenate([model.centers.T, model.embedding.T], axis=1)


def constraint_residuals(model: CcdrModel, W=None, C=None) -> dict[str, float]:
    """Max-norm residuals of the four fitted-model identities.

    gram:   Zhat Dg Zhat^T = I
    mean:   Zhat Dg 1 = 0
    center: z_k = sum_i c_ki y_i / ((1 - lambda) n_k)
    row:    y_i = (sum_k c_ki z_k + b sum_j w_ij y_j)
                  / ((1 - lambda) (sum_k c_ki + b sum_j w_ij))

    W and C default to a rebuild from the stored training data.
    """
    if C is None:
        C = make_indicator(
            LabeledDataset(
                model.train_points, model.train_labels, model.num_classes
            )
        )
    if isinstance(C, ClassIndicator):
        C = C.matrix
    if W is None:
        W = heat_weights(
            knn_graph(model.train_points, model.k), model.train_points, model.eps
        )
    Wmat = W.matrix if isinstance(W, WeightMatrix) else np.asarray(W)
    lam = model.eigenvalues
    Z = model.centers
    Y = model.embedding
    Zhat = _stack(model)
    w_deg = np.asarray(Wmat.sum(axis=1)).ravel()
    labeled = np.asarray(C.sum(axis=0)).ravel()
    deg = np.concatenate([model.class_sizes.astype(float), labeled + model.beta * w_deg])
    gram = Zhat * deg[None, :] @ Zhat.T
    res_gram = float(np.abs(gram - np.eye(model.m)).max())
    res_mean = float(np.abs(Zhat @ deg).max())
    cy = C @ Y
    z_rhs = cy / (model.class_sizes.astype(float)[:, None] * (1.0 - lam)[None, :])
    res_center = float(np.abs(Z - z_rhs).max())
    num = C.T @ Z + model.beta * (Wmat @ Y)
    den = (labeled + model.beta * w_deg)[:, None] * (1.0 - lam)[None, :]
    res_row = float(np.abs(Y - num / den).max())
    return {
        "gram": res_gram,
        "mean": res_mean,
        "center": res_center,
        "row": res_row,
    }


def cost(Z: np.ndarray, Y: np.ndarray, C, W, beta: float) -> float:
    """Objective sum_ki c_ki ||z_k - y_i||^2 + (b/2) sum_ij w_ij ||y_i - y_j||^2.

    Z is (L, m), Y is (n, m). Equals tr(Zhat Lap Zhat^T) for the stacked
    arrangement, feasible or not.
    """
    if isinstance(C, ClassIndicator):
        C = C.matrix
    C = np.asarray(C, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    term1 = float((C * cdist(Z, Y, "sqeuclidean")).sum())
    Wmat = W.matrix if isinstance(W, WeightMatrix) else np.asarray(W)
    coo = Wmat.tocoo() if hasattr(Wmat, "tocoo") else None
    if coo is not None:
        diff2 = ((Y[coo.row] - Y[coo.col]) ** 2).sum(axis=1)
        term2 = 0.5 * beta * float((coo.data * diff2).sum())
    else:
        term2 = 0.5 * beta * float((Wmat * cdist(Y, Y, "sqeuclidean")).sum())
    return term1 + term2


def embed_oos(
    model: CcdrModel,
    x: np.ndarray,
    c: int = 0,
    full_kernel: bool = False,
    weights: np.ndarray | None = None,
) -> np.ndarray:
    """Embed one new point, optionally with a known label c in {1..L}.

    The kernel row keeps the k nearest training points by default;
    full_kernel=True uses every training point. A precomputed length-n
    `weights` vector overrides both. Raises "query outside model support"
    when the denominator vanishes (unlabeled query with zero kernel mass).
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (model.d,):
        raise ValueError("x must have dimension %d" % model.d)
    c = int(c)
    if not 0 <= c <= model.num_classes:
        raise ValueError("label c must lie in {0, .., %d}" % model.num_classes)
    if weights is None:
        if full_kernel:
            d2 = cdist(x[None, :], model.train_points, "sqeuclidean")[0]
            weights = np.exp(-d2 / model.eps)
        else:
            weights = kernel_row(x, model.train_points, model.k, model.eps)
    else:
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if weights.shape != (model.n,):
            raise ValueError("weights must have length n = %d" % model.n)
    mass = float(weights.sum())
    lab = 1.0 if c > 0 else 0.0
    den = lab + model.beta * mass
    if den <= 0.0:
        raise ValueError("query outside model support: zero kernel mass")
    num = model.beta * (weights @ model.embedding)
    if c > 0:
        num = num + model.centers[c - 1]
    return num / ((1.0 - model.eigenvalues) * den)


def embed_many(
    model: CcdrModel,
    X: np.ndarray,
    c: np.ndarray | int = 0,
    full_kernel: bool = False,
) -> np.ndarray:
    """Embed a batch of points; c is one label or a vector of labels."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise ValueError("X must be q x %d" % model.d)
    q = X.shape[0]
    cs = np.full(q, int(c), dtype=np.int64) if np.isscalar(c) else np.asarray(c, dtype=np.int64)
    if cs.shape != (q,):
        raise ValueError("c must be a scalar or a length-q vector")
    if cs.min(initial=0) < 0 or cs.max(initial=0) > model.num_classes:
        raise ValueError("labels must lie in {0, .., %d}" % model.num_classes)
    if full_kernel:
        K = np.exp(-cdist(X, model.train_points, "sqeuclidean") / model.eps)
    else:
        K = kernel_rows(X, model.train_points, model.k, model.eps)
    lab = (cs > 0).astype(np.float64)
    den = lab + model.beta * K.sum(axis=1)
    bad = np.nonzero(den <= 0.0)[0]
    if bad.size:
        raise ValueError(
            "query %d outside model support: zero kernel mass" % int(bad[0])
        )
    num = model.beta * (K @ model.embedding)
    labeled = np.nonzero(cs > 0)[0]
    if labeled.size:
        num[labeled] += model.centers[cs[labeled] - 1]
    return num / ((1.0 - model.eigenvalues)[None, :] * den[:, None])


def refit_embed(model: CcdrModel, x: np.ndarray) -> np.ndarray:
    """Embed one point by refitting with it appended as an unlabeled vertex.

    This is the brute-force alternative to the extension formula: the point
    joins the training set without a label, the whole spectral problem is
    solved again with the model's hyperparameters (same absolute eps), and
    the new point's row is read off. Columns of the refitted solution are
    sign-aligned to the original embedding before the row is returned.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (model.d,):
        raise ValueError("x must have dimension %d" % model.d)
    pts = np.vstack([model.train_points, x[None, :]])
    labs = np.concatenate([model.train_labels, [0]])
    ds = LabeledDataset(pts, labs, model.num_classes)
    refit = fit(ds, k=model.k, eps=model.eps, beta=model.beta, m=model.m)
    flip = np.sign(
        np.einsum("ij,ij->j", refit.embedding[:-1], model.embedding)
    )
    flip[flip == 0] = 1.0
    return refit.embedding[-1] * flip


def shrink(model: CcdrModel, m: int) -> CcdrModel:
    """Restrict a fitted model to its first m coordinates.

    The leading eigenpairs do not depend on how many were requested, so
    this equals a direct fit at the smaller m (up to eigensolver rounding).
    """
    if not 1 <= m <= model.m:
        raise ValueError("m must satisfy 1 <= m <= %d" % model.m)
    return CcdrModel(
        centers=model.centers[:, :m].copy(),
        embedding=model.embedding[:, :m].copy(),
        eigenvalues=model.eigenvalues[:m].copy(),
        beta=model.beta,
        eps=model.eps,
        k=model.k,
        m=m,
        train_points=model.train_points,
        train_labels=model.train_labels,
        num_classes=model.num_classes,
        class_sizes=model.class_sizes,
    )


def save_model(model: CcdrModel, path) -> None:
    """Persist a model as a flat .npz container with a format version."""
    np.savez(
        path,
        format_version=np.int64(MODEL_FORMAT_VERSION),
        centers=model.centers,
        embedding=model.embedding,
        eigenvalues=model.eigenvalues,
        beta=np.float64(model.beta),
        eps=np.float64(model.eps),
        k=np.int64(model.k),
        m=np.int64(model.m),
        train_points=model.train_points,
        train_labels=model.train_labels,
        num_classes=np.int64(model.num_classes),
        class_sizes=model.class_sizes,
    )


def load_model(path) -> CcdrModel:
    """Load a model written by save_model; the round trip is lossless."""
    with np.load(path) as z:
        version = int(z["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(
                "unsupported model format version %d (expected %d)"
                % (version, MODEL_FORMAT_VERSION)
            )
        return CcdrModel(
            centers=z["centers"],
            embedding=z["embedding"],
            eigenvalues=z["eigenvalues"],
            beta=float(z["beta"]),
            eps=float(z["eps"]),
            k=int(z["k"]),
            m=int(z["m"]),
            train_points=z["train_points"],
            train_labels=z["train_labels"],
            num_classes=int(z["num_classes"]),
            class_sizes=z["class_sizes"],
        )
