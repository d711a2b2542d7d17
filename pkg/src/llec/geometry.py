"""Point clouds, distances and k-nearest-neighbor search.

Point clouds are ``(D, p)`` arrays: one column per point.  Neighbor search
skips points at exactly zero distance, so repeated pixel colors never end up
as each other's neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass
from os import PathLike

import numpy as np

METRICS = ("euclidean",)

# Upper bound on the float64 entries of the difference tensor built per chunk.
_CHUNK_ELEMENTS = 2**23


class NeighborError(ValueError):
    """Raised when a point has fewer than k candidates at positive distance."""

    def __init__(self, index: int, available: int, k: int):
        self.index = index
        self.available = available
        self.k = k
        super().__init__(
            f"point {index} has only {available} neighbors at positive distance, "
            f"need k={k}"
        )


@dataclass(frozen=True)
class NeighborGraph:
    """Fixed-k neighbor lists.

    ``neighbors[i]`` holds the indices of the k nearest points to point i,
    ordered by nondecreasing distance; ``distances[i]`` the matching
    Euclidean distances.
    """

    neighbors: np.ndarray
    distances: np.ndarray

    @property
    def k(self) -> int:
        return self.neighbors.shape[1]

    @property
    def p(self) -> int:
        return self.neighbors.shape[0]

    def adjacency(self):
        """Symmetrized 0/1 adjacency as a sparse CSR matrix."""
        from scipy import sparse

        rows = np.repeat(np.arange(self.p), self.k)
        A = sparse.csr_matrix(
            (np.ones(rows.size), (rows, self.neighbors.ravel())), shape=(self.p, self.p)
        )
        A = ((A + A.T) > 0).astype(np.float64)
        return A


def as_cloud(X, *, unit_interval: bool = False) -> np.ndarray:
    """Validate and return a float64 ``(D, p)`` point cloud."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"point cloud must be a nonempty (D, p) array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("point cloud contains non-finite entries")
    if unit_interval and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError("point cloud entries must lie in [0, 1]")
    return X


def distance(a, b, metric: str = "euclidean") -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; available: {METRICS}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def _chunk_rows(p: int, D: int) -> int:
    return max(1, _CHUNK_ELEMENTS // max(1, p * D))


def squared_distances(X: np.ndarray, rows: slice) -> np.ndarray:
    """Exact squared distances from the points in ``rows`` to every point.

    Differences are formed explicitly (no ``|a|^2 + |b|^2 - 2ab`` expansion),
    so the result is exactly zero iff two columns are bitwise equal.
    """
    diff = X.T[rows, np.newaxis, :] - X.T[np.newaxis, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def knn(X, k: int, metric: str = "euclidean") -> NeighborGraph:
    """Brute-force k-nearest-neighbor search with duplicate exclusion.

    Parameters
    ----------
    X : array, shape (D, p)
        Point cloud, one point per column.
    k : int
        Number of neighbors per point.
    metric : str
        Only ``"euclidean"``.

    Returns
    -------
    NeighborGraph
        Points at distance zero from ``x_i`` (including ``x_i`` itself) are
        never neighbors.  Equidistant candidates are ordered by lower index.

    Raises
    ------
    NeighborError
        If some point has fewer than ``k`` points at positive distance.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; available: {METRICS}")
    X = as_cloud(X)
    D, p = X.shape
    if k < 1:
        raise ValueError("k must be a positive integer")

    neighbors = np.empty((p, k), dtype=np.intp)
    sq = np.empty((p, k), dtype=np.float64)
    step = _chunk_rows(p, D)
    for start in range(0, p, step):
        rows = slice(start, min(p, start + step))
        d2 = squared_distances(X, rows)
        d2[d2 == 0.0] = np.inf
        available = np.isfinite(d2).sum(axis=1)
        short = np.flatnonzero(available < k)
        if short.size:
            i = int(short[0])
            raise NeighborError(start + i, int(available[i]), k)
        # k-th smallest value per row, then resolve boundary ties by index
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
        for r in range(d2.shape[0]):
            cand = np.flatnonzero(d2[r] <= kth[r])
            order = np.lexsort((cand, d2[r, cand]))[:k]
            neighbors[start + r] = cand[order]
            sq[start + r] = d2[r, cand[order]]
    return NeighborGraph(neighbors=neighbors, distances=np.sqrt(sq))


def load_cloud_csv(path: str | PathLike) -> np.ndarray:
    """Read a CSV with one point per row (no header) into a ``(D, p)`` cloud."""
    data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return as_cloud(data.T)


def save_cloud_csv(path: str | PathLike, X) -> None:
    X = as_cloud(X)
    np.savetxt(path, X.T, delimiter=",", fmt="%.17g")
