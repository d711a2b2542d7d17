"""Iterative subspace segmentation of an embedding, and the LLEC clustering loop.

Each round picks a seed point among the still-active points, fits the
principal affine subspace of the embedding points in a ball around it and
claims every active point that is both close to that subspace (``eps1``) and
close in color to the seed (``eps2``).  Claimed points leave the active set;
the loop ends when none remain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import as_cloud
from .lle import Embedding, run_lle

STRATEGIES = ("random", "densest-ball", "bth-neighbor", "min-sv-ratio")


class DegenerateBallError(ValueError):
    """The ball has no principal direction (fewer than two distinct points)."""


@dataclass(frozen=True)
class SeedStrategy:
    """How the seed point of each round is chosen.

    ``eps_ball`` is the ball radius for ``densest-ball`` and
    ``min-sv-ratio``; ``None`` means "use the segmentation ball radius".
    ``seed`` drives the ``random`` strategy.
    """

    kind: str = "bth-neighbor"
    b: int = 50
    eps_ball: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown seed strategy {self.kind!r}; choose from {STRATEGIES}")
        if self.b < 1:
            raise ValueError("b must be >= 1")
        if self.eps_ball is not None and self.eps_ball <= 0:
            raise ValueError("eps_ball must be positive")


@dataclass(frozen=True)
class SubspaceCluster:
    members: np.ndarray
    basis: np.ndarray
    center: np.ndarray
    seed_index: int
    prototype: np.ndarray


@dataclass(frozen=True)
class Clustering:
    clusters: list
    assignment: np.ndarray

    @property
    def S(self) -> int:
        return len(self.clusters)

    @property
    def prototypes(self) -> np.ndarray:
        """Prototypes as columns, shape ``(D, S)``."""
        return np.stack([c.prototype for c in self.clusters], axis=1)

    @property
    def counts(self) -> np.ndarray:
        return np.array([c.members.size for c in self.clusters])


@dataclass(frozen=True)
class LLECConfig:
    k: int = 4
    d: int = 2
    lam: float = 1e-9
    reg_tol: float = 1e-3
    eps1: float = 0.4
    eps2: float = 0.4
    eps_ball: float | None = None
    m: int = 1
    strategy: SeedStrategy = field(default_factory=SeedStrategy)
    closed_cycle: bool = False
    prototype: str = "color"

    def __post_init__(self):
        if self.eps1 <= 0 or self.eps2 <= 0:
            raise ValueError("eps1 and eps2 must be positive")
        if self.eps_ball is not None and self.eps_ball <= 0:
            raise ValueError("eps_ball must be positive")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.prototype not in ("color", "embedding"):
            raise ValueError("prototype must be 'color' or 'embedding'")


def _ball_svals(points: np.ndarray) -> np.ndarray:
    A = points - points.mean(axis=0)
    return np.linalg.svd(A, compute_uv=False)


def select_seed(Y_active, X_active, strategy: SeedStrategy, *, rng=None, eps_ball=None) -> int:
    """Index (into the active arrays) of the next seed point.

    ``Y_active`` is ``(d, n)``; ``X_active`` is the matching ``(D, n)`` block
    of original points, accepted for interface symmetry.  Ties go to the
    lowest index.
    """
    Y = np.asarray(Y_active, dtype=np.float64)
    n = Y.shape[1]
    if n == 0:
        raise ValueError("no active points to choose a seed from")
    if n == 1:
        return 0
    radius = strategy.eps_ball if strategy.eps_ball is not None else eps_ball

    if strategy.kind == "random":
        rng = rng if rng is not None else np.random.default_rng(strategy.seed)
        return int(rng.integers(n))

    pts = Y.T
    tree = cKDTree(pts)
    if strategy.kind == "bth-neighbor":
        b = strategy.b if n > strategy.b else math.ceil(n / 2)
        dist, _ = tree.query(pts, k=b + 1)
        return int(np.argmin(dist[:, b]))

    if radius is None:
        raise ValueError(f"strategy {strategy.kind!r} needs a ball radius")
    if strategy.kind == "densest-ball":
        counts = tree.query_ball_point(pts, radius, return_length=True)
        return int(np.argmax(counts))

    # min-sv-ratio: balls with fewer than 3 points carry no evidence of linearity
    ratios = np.full(n, np.inf)
    for i, idx in enumerate(tree.query_ball_point(pts, radius)):
        if len(idx) < 3:
            continue
        s = _ball_svals(pts[np.sort(idx)])
        if s[0] == 0:
            continue
        ratios[i] = s[1] / s[0] if s.size > 1 else 0.0
    return int(np.argmin(ratios))


def principal_subspace(ball_points, m: int = 1):
    """Top-``m`` principal directions of a ball of embedding points.

    Parameters
    ----------
    ball_points : array, shape (d, n)
    m : int

    Returns
    -------
    basis : ndarray, shape (d, m)
        Orthonormal columns: the leading right singular vectors of the
        mean-centered ball matrix.
    center : ndarray, shape (d,)
    """
    P = np.asarray(ball_points, dtype=np.float64)
    if P.shape[1] < 2:
        raise DegenerateBallError("ball needs at least two points")
    if m > P.shape[0]:
        raise ValueError(f"subspace dimension m={m} exceeds embedding dimension {P.shape[0]}")
    center = P.mean(axis=1)
    A = (P - center[:, np.newaxis]).T
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    if s[0] == 0:
        raise DegenerateBallError("all ball points coincide")
    return Vt[:m].T.copy(), center


def subspace_residuals(Y, basis, center) -> np.ndarray:
    R = np.asarray(Y, dtype=np.float64) - np.asarray(center)[:, np.newaxis]
    R = R - basis @ (basis.T @ R)
    return np.sqrt(np.einsum("ij,ij->j", R, R))


def assign_to_subspace(Y_active, X_active, basis, center, seed_color, eps1, eps2) -> np.ndarray:
    """Active indices within ``eps1`` of the affine subspace and ``eps2`` of the seed color."""
    X = np.asarray(X_active, dtype=np.float64)
    near = subspace_residuals(Y_active, basis, center) < eps1
    diff = X - np.asarray(seed_color, dtype=np.float64)[:, np.newaxis]
    similar = np.sqrt(np.einsum("ij,ij->j", diff, diff)) < eps2
    return np.flatnonzero(near & similar)


def segment(Y, X, eps1: float, eps2: float, *, m: int = 1, eps_ball: float | None = None,
            strategy: SeedStrategy = SeedStrategy(), prototype: str = "color") -> Clustering:
    """Run the iterative subspace segmentation on given embedding coordinates.

    Parameters
    ----------
    Y : array, shape (d, p)
        Embedding coordinates.
    X : array, shape (D, p)
        Original points (colors) used by the ``eps2`` test and for prototypes.
    eps1, eps2 : float
        Subspace-proximity and color-similarity thresholds (strict).
    m : int
        Dimension of the fitted subspaces.
    eps_ball : float, optional
        Radius of the ball whose principal subspace is fitted; defaults to
        ``eps1``.
    strategy : SeedStrategy
    prototype : {"color", "embedding"}
        Prototype of a cluster: mean of member colors, or mean of member
        embedding vectors.
    """
    Y = as_cloud(Y)
    X = as_cloud(X)
    if Y.shape[1] != X.shape[1]:
        raise ValueError("embedding and points must have the same number of columns")
    radius = eps1 if eps_ball is None else eps_ball
    p = Y.shape[1]
    rng = np.random.default_rng(strategy.seed)

    active = np.arange(p)
    assignment = np.full(p, -1, dtype=np.intp)
    clusters = []
    while active.size:
        Ya, Xa = Y[:, active], X[:, active]
        s = select_seed(Ya, Xa, strategy, rng=rng, eps_ball=radius)
        y_star, x_star = Ya[:, s], Xa[:, s]
        dist = np.sqrt(np.sum((Ya - y_star[:, np.newaxis]) ** 2, axis=0))
        ball = Ya[:, dist <= radius]
        try:
            basis, center = principal_subspace(ball, m)
            local = assign_to_subspace(Ya, Xa, basis, center, x_star, eps1, eps2)
        except DegenerateBallError:
            # zero-dimensional subspace: exact location plus color test
            basis, center = np.zeros((Y.shape[0], 0)), y_star.copy()
            cdist = np.sqrt(np.sum((Xa - x_star[:, np.newaxis]) ** 2, axis=0))
            local = np.flatnonzero(np.all(Ya == y_star[:, np.newaxis], axis=0) & (cdist < eps2))
        # the seed's residual is only bounded by the ball radius, not by eps1
        local = np.union1d(local, [s])
        members = active[local]
        source = X if prototype == "color" else Y
        clusters.append(SubspaceCluster(
            members=members,
            basis=basis,
            center=center,
            seed_index=int(active[s]),
            prototype=source[:, members].mean(axis=1),
        ))
        assignment[members] = len(clusters) - 1
        keep = np.ones(active.size, dtype=bool)
        keep[local] = False
        active = active[keep]
    return Clustering(clusters=clusters, assignment=assignment)


def llec_cluster(X, config: LLECConfig = LLECConfig(), *, embedding: Embedding | None = None,
                 solver: str = "auto") -> tuple[Clustering, Embedding]:
    """Embed ``X`` with LLE and segment the embedding.

    Returns the clustering and the embedding it was computed from.  Pass
    ``embedding`` to reuse one across threshold settings.
    """
    X = as_cloud(X)
    if embedding is None:
        embedding = run_lle(X, k=config.k, d=config.d, lam=config.lam, reg_tol=config.reg_tol,
                            closed_cycle=config.closed_cycle, solver=solver)
    clustering = segment(embedding.Y, X, config.eps1, config.eps2, m=config.m,
                         eps_ball=config.eps_ball, strategy=config.strategy,
                         prototype=config.prototype)
    return clustering, embedding


def reconstruct(X, clustering: Clustering) -> np.ndarray:
    """Replace every point by its cluster's prototype."""
    X = as_cloud(X)
    if clustering.assignment.shape != (X.shape[1],) or np.any(clustering.assignment < 0):
        raise ValueError("clustering assignment must cover every point")
    return clustering.prototypes[:, clustering.assignment]
