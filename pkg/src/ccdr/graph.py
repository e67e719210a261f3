"""Symmetrized kNN graphs with heat-kernel edge weights.

Distances are Euclidean; ties are broken by ascending point index, so
construction is deterministic. An edge {i, j} exists when i is among the k
nearest neighbours of j or vice versa (union symmetrization).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected kNN graph on n vertices.

    edges is an (E, 2) int64 array with i < j per row, sorted
    lexicographically.
    """

    n_vertices: int
    k: int
    edges: np.ndarray

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}


@dataclass(frozen=True)
class WeightMatrix:
    """Sparse symmetric nonnegative weights with zero diagonal."""

    matrix: csr_matrix
    eps: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


def _sq_dists(points: np.ndarray) -> np.ndarray:
    return cdist(points, points, "sqeuclidean")


def _stable_neighbors(d2: np.ndarray, k: int) -> np.ndarray:
    """First k columns of a stable argsort per row; ties keep index order."""
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def knn_graph(points: np.ndarray, k: int) -> NeighborGraph:
    """Symmetrized-union kNN graph under Euclidean distance.

    Requires 1 <= k <= n - 1. Distance ties are broken by ascending index.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ValueError("need an n x d matrix with n >= 2")
    n = points.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError("k must satisfy 1 <= k <= n - 1, got k=%d, n=%d" % (k, n))
    d2 = _sq_dists(points)
    np.fill_diagonal(d2, np.inf)
    nbrs = _stable_neighbors(d2, k)
    rows = np.repeat(np.arange(n), k)
    cols = nbrs.ravel()
    lo = np.minimum(rows, cols)
    hi = np.maximum(rows, cols)
    codes = np.unique(lo.astype(np.int64) * n + hi)
    edges = np.column_stack([codes // n, codes % n]).astype(np.int64)
    return NeighborGraph(n_vertices=n, k=k, edges=edges)


def edge_sq_distances(graph: NeighborGraph, points: np.ndarray) -> np.ndarray:
    """Squared Euclidean length of every edge, in edge order."""
    points = np.asarray(points, dtype=np.float64)
    i = graph.edges[:, 0]
    j = graph.edges[:, 1]
    diff = points[i] - points[j]
    return np.einsum("ij,ij->i", diff, diff)


def median_eps(graph: NeighborGraph, points: np.ndarray) -> float:
    """Median of squared edge distances, the default heat-kernel width."""
    if graph.edges.shape[0] == 0:
        raise ValueError("graph has no edges")
    return float(np.median(edge_sq_distances(graph, points)))


def heat_weights(
    graph: NeighborGraph, points: np.ndarray, eps: float
) -> WeightMatrix:
    """Heat-kernel weights w_ij = exp(-||x_i - x_j||^2 / eps) on graph edges.

    The two triangles share each computed value, so the matrix is exactly
    symmetric.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    points = np.asarray(points, dtype=np.float64)
    n = graph.n_vertices
    # cdist keeps edge weights bit-consistent with kernel_row on the same pairs
    d2 = _sq_dists(points)[graph.edges[:, 0], graph.edges[:, 1]]
    w = np.exp(-d2 / eps)
    i = graph.edges[:, 0]
    j = graph.edges[:, 1]
    mat = csr_matrix(
        (np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
        shape=(n, n),
    )
    return WeightMatrix(matrix=mat, eps=float(eps))


def kernel_row(
    x: np.ndarray, train_points: np.ndarray, k: int, eps: float
) -> np.ndarray:
    """Heat-kernel weights from a query to its k nearest training points.

    Entry j is exp(-||x - x_j||^2 / eps) when x_j is among the k nearest
    training points to x (ties by ascending index) and 0 otherwise.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    train_points = np.asarray(train_points, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    n = train_points.shape[0]
    if not 1 <= k < n:
        raise ValueError("k must satisfy 1 <= k <= n - 1, got k=%d, n=%d" % (k, n))
    d2 = cdist(x, train_points, "sqeuclidean")[0]
    nbrs = np.argsort(d2, kind="stable")[:k]
    out = np.zeros(n)
    out[nbrs] = np.exp(-d2[nbrs] / eps)
    return out


def kernel_rows(
    X: np.ndarray, train_points: np.ndarray, k: int, eps: float
) -> np.ndarray:
    """Vectorized kernel_row for a batch of queries, shape (q, n)."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    train_points = np.asarray(train_points, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a q x d matrix")
    n = train_points.shape[0]
    if not 1 <= k < n:
        raise ValueError("k must satisfy 1 <= k <= n - 1, got k=%d, n=%d" % (k, n))
    d2 = cdist(X, train_points, "sqeuclidean")
    nbrs = _stable_neighbors(d2, k)
    out = np.zeros_like(d2)
    rows = np.repeat(np.arange(X.shape[0]), k)
    cols = nbrs.ravel()
    out[rows, cols] = np.exp(-d2[rows, cols] / eps)
    return out


def export_edges_csv(wm: WeightMatrix, path) -> None:
    """Write the weighted edge list as CSV rows i,j,w with i < j (0-based)."""
    coo = wm.matrix.tocoo()
    rows = [
        (int(i), int(j), float(w))
        for i, j, w in zip(coo.row, coo.col, coo.data)
        if i < j
    ]
    rows.sort()
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "w"])
        for i, j, wt in rows:
            w.writerow([i, j, repr(wt)])
