"""Locally linear embedding with a path/cycle Laplacian connectivity repair.

The pipeline is ``knn -> solve_weights -> build_cost_matrix -> perturb ->
embed``; :func:`run_lle` composes it.  The cost matrix of a neighbor graph
with c connected components has a c-dimensional null space, which makes the
bottom eigenvectors ill defined.  Adding ``lam * T`` for a connected
Laplacian ``T`` leaves only the constant vector in the null space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .geometry import NeighborGraph, as_cloud, knn

log = logging.getLogger(__name__)

DENSE_LIMIT = 500


class LLEError(RuntimeError):
    pass


class CorankError(LLEError):
    """The cost matrix has more than one null direction."""


class EigenSolverError(LLEError):
    pass


@dataclass(frozen=True)
class EmbedCostMatrix:
    M: sparse.csr_matrix
    lam: float = 0.0
    perturbed: bool = False

    @property
    def p(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True)
class Embedding:
    """Embedding coordinates, one column per input point.

    ``Y`` has shape ``(d, p)``.  Rows are unit-norm eigenvectors of the cost
    matrix, each orthogonal to the constant vector.
    """

    Y: np.ndarray
    eigenvalues: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.Y.shape[0]


def solve_weights(X, graph: NeighborGraph, reg_tol: float = 1e-3) -> sparse.csr_matrix:
    """Reconstruction weights from the regularized local Gram systems.

    For each point the local Gram matrix ``C[j, l] = (x_i - x_j).(x_i - x_l)``
    over its neighbors gets ``reg_tol * trace(C)`` added to the diagonal,
    ``C w = 1`` is solved and ``w`` is rescaled to sum to one.
    """
    if reg_tol <= 0:
        raise ValueError("reg_tol must be positive")
    X = as_cloud(X)
    p = X.shape[1]
    if graph.p != p:
        raise ValueError("neighbor graph does not match the point cloud")
    k = graph.k
    pts = X.T
    Z = pts[graph.neighbors] - pts[:, np.newaxis, :]  # (p, k, D)
    C = Z @ Z.transpose(0, 2, 1)
    trace = np.trace(C, axis1=1, axis2=2)
    bad = np.flatnonzero(trace <= 0.0)
    if bad.size:
        raise LLEError(f"local Gram matrix of point {int(bad[0])} is zero")
    C[:, np.arange(k), np.arange(k)] += (reg_tol * trace)[:, np.newaxis]
    try:
        w = np.linalg.solve(C, np.ones((p, k, 1)))[..., 0]
    except np.linalg.LinAlgError as exc:
        raise LLEError("singular regularized Gram matrix") from exc
    w /= w.sum(axis=1, keepdims=True)
    rows = np.repeat(np.arange(p), k)
    return sparse.csr_matrix((w.ravel(), (rows, graph.neighbors.ravel())), shape=(p, p))


def build_cost_matrix(W) -> EmbedCostMatrix:
    """``M = (I - W)^T (I - W)``, unperturbed."""
    W = sparse.csr_matrix(W, dtype=np.float64)
    p = W.shape[0]
    A = sparse.identity(p, format="csr") - W
    M = (A.T @ A).tocsr()
    # the product is symmetric only up to summation order
    M = ((M + M.T) * 0.5).tocsr()
    M.sum_duplicates()
    return EmbedCostMatrix(M=M, lam=0.0, perturbed=False)


def cycle_laplacian(p: int, closed: bool = False) -> sparse.csr_matrix:
    """Tridiagonal Laplacian with diagonal (1, 2, ..., 2, 1) and off-diagonals -1.

    With ``closed=True`` the ends are joined: every diagonal entry is 2 and
    entries ``(0, p-1)`` and ``(p-1, 0)`` are -1.
    """
    if p < 2:
        raise ValueError("cycle_laplacian needs p >= 2")
    if closed and p == 2:
        # both wrap edges coincide with the single path edge
        closed = False
    diag = np.full(p, 2.0)
    if not closed:
        diag[0] = diag[-1] = 1.0
    off = -np.ones(p - 1)
    T = sparse.diags([off, diag, off], [-1, 0, 1], format="lil")
    if closed:
        T[0, p - 1] = -1.0
        T[p - 1, 0] = -1.0
    return T.tocsr()


def perturb(cost: EmbedCostMatrix, lam: float = 1e-9, closed: bool = False) -> EmbedCostMatrix:
    if lam <= 0:
        raise ValueError("perturbation scale must be positive")
    T = cycle_laplacian(cost.p, closed=closed)
    return EmbedCostMatrix(M=(cost.M + lam * T).tocsr(), lam=lam, perturbed=True)


def _bottom_eigenvalues_sparse(M: sparse.csr_matrix, n: int, shift: float) -> np.ndarray:
    vals = eigsh(
        M, k=n, sigma=-shift, which="LM", return_eigenvectors=False,
        v0=np.random.default_rng(0).random(M.shape[0]),
    )
    return np.sort(vals)


def count_components(cost: EmbedCostMatrix, tol: float = 1e-10,
                     perturbed_tol: float = 1e-3) -> int:
    """Number of eigenvalues below ``tol`` times the largest eigenvalue.

    On a perturbed matrix the former null eigenvalues are lifted only to
    roughly ``lam / p``, which is usually below the relative threshold, so
    the threshold is further capped at ``perturbed_tol * lam``.
    """
    M = cost.M
    p = M.shape[0]

    def threshold(top):
        thresh = tol * max(top, np.finfo(float).tiny)
        if cost.perturbed and cost.lam > 0:
            thresh = min(thresh, perturbed_tol * cost.lam)
        return thresh

    if p <= 2000:
        vals = scipy.linalg.eigvalsh(M.toarray())
        return int(np.sum(vals < threshold(vals[-1])))
    top = eigsh(M, k=1, which="LA", return_eigenvectors=False)[0]
    thresh = threshold(top)
    n = min(16, p - 1)
    while True:
        vals = _bottom_eigenvalues_sparse(M, n, shift=thresh)
        count = int(np.sum(vals < thresh))
        if count < n or n == p - 1:
            return count
        n = min(2 * n, p - 1)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each row made positive
    idx = np.argmax(np.abs(V), axis=1)
    signs = np.sign(V[np.arange(V.shape[0]), idx])
    signs[signs == 0] = 1.0
    return V * signs[:, np.newaxis]


def embed(
    cost: EmbedCostMatrix,
    d: int,
    *,
    solver: str = "auto",
    shift: float = 1e-10,
    null_tol: float = 1e-10,
    const_tol: float = 1e-3,
    maxiter: int | None = None,
    seed: int = 0,
) -> Embedding:
    """Bottom eigenvectors of the cost matrix, constant vector discarded.

    Parameters
    ----------
    cost : EmbedCostMatrix
        Usually perturbed; an unperturbed matrix must have corank 1.
    d : int
        Target dimension, ``d < p``.
    solver : {"auto", "dense", "arpack"}
        ``auto`` uses a dense solve for ``p <= 500`` and shift-invert
        ARPACK otherwise.
    shift : float
        ARPACK runs in shift-invert mode around ``-shift``.
    null_tol : float
        Relative threshold below which a second eigenvalue counts as a
        second null direction (only checked for unperturbed matrices).
    const_tol : float
        Maximum coordinate-wise relative deviation of the discarded bottom
        eigenvector from a constant vector.

    Raises
    ------
    CorankError
        The bottom eigenvector is not constant, or an unperturbed matrix
        has more than one null direction.
    EigenSolverError
        ARPACK failed to converge.
    """
    M = cost.M
    p = cost.p
    if not 1 <= d < p:
        raise ValueError(f"need 1 <= d < p, got d={d}, p={p}")
    if solver == "auto":
        solver = "dense" if p <= DENSE_LIMIT else "arpack"

    if solver == "dense":
        vals, vecs = scipy.linalg.eigh(M.toarray(), subset_by_index=[0, d])
    elif solver == "arpack":
        if d + 1 >= p:
            raise ValueError("arpack needs d + 1 < p; use solver='dense'")
        v0 = np.random.default_rng(seed).random(p)
        try:
            vals, vecs = eigsh(M, k=d + 1, sigma=-shift, which="LM", v0=v0, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise EigenSolverError(
                f"ARPACK did not converge: {len(exc.eigenvalues)} of {d + 1} eigenpairs "
                f"after maxiter={maxiter} (p={p}, shift={shift})"
            ) from exc
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    else:
        raise ValueError(f"unknown solver {solver!r}")

    scale = abs(M).sum(axis=1).max()  # bounds the largest eigenvalue
    if not cost.perturbed and vals[1] < null_tol * scale:
        raise CorankError(
            "cost matrix has more than one null direction (disconnected neighbor "
            "graph); perturb it with a positive lambda"
        )
    bottom = vecs[:, 0]
    mean = bottom.mean()
    if mean == 0 or np.max(np.abs(bottom - mean)) / abs(mean) >= const_tol:
        raise CorankError(
            "bottom eigenvector is not constant; the null space is not resolved "
            "(increase lambda or k)"
        )
    vals, Y = _deflate_constant(M, vecs, d)
    log.debug("embedding eigenvalues %s", vals)
    return Embedding(Y=_fix_signs(Y), eigenvalues=vals, params={"d": d, "lam": cost.lam})


def _deflate_constant(M, vecs: np.ndarray, d: int):
    """Rayleigh-Ritz on the computed eigenvectors with the constant vector removed.

    The constant vector is an exact null vector of ``M``; removing it
    explicitly keeps the embedding exactly centered even when small
    eigenvalues cluster near zero.
    """
    V = vecs - vecs.mean(axis=0, keepdims=True)
    U, _, _ = np.linalg.svd(V, full_matrices=False)
    Q = U[:, :d]
    Q -= Q.mean(axis=0, keepdims=True)
    Q, _ = np.linalg.qr(Q)
    H = Q.T @ (M @ Q)
    theta, R = np.linalg.eigh((H + H.T) * 0.5)
    return theta, (Q @ R).T


def run_lle(
    X,
    k: int = 4,
    d: int = 2,
    lam: float = 1e-9,
    reg_tol: float = 1e-3,
    *,
    closed_cycle: bool = False,
    solver: str = "auto",
    seed: int = 0,
) -> Embedding:
    """knn, weights, cost matrix, perturbation (when ``lam > 0``) and embedding.

    ``lam = 0`` disables the perturbation; a disconnected neighbor graph
    then raises :class:`CorankError`.
    """
    X = as_cloud(X)
    graph = knn(X, k)
    W = solve_weights(X, graph, reg_tol)
    cost = build_cost_matrix(W)
    if lam > 0:
        cost = perturb(cost, lam, closed=closed_cycle)
    emb = embed(cost, d, solver=solver, seed=seed)
    params = {"k": k, "d": d, "lam": lam, "reg_tol": reg_tol, "closed_cycle": closed_cycle}
    return Embedding(Y=emb.Y, eigenvalues=emb.eigenvalues, params=params)


def save_embedding(path: str | PathLike, emb: Embedding) -> Path:
    """Write ``p`` rows of ``d`` values to ``path`` and a ``.npz`` provenance sidecar.

    Returns the sidecar path.
    """
    path = Path(path)
    np.savetxt(path, emb.Y.T, delimiter=",", fmt="%.17g")
    sidecar = path.with_suffix(path.suffix + ".npz")
    params = {key: np.asarray(val) for key, val in emb.params.items()}
    with open(sidecar, "wb") as fh:
        np.savez(fh, eigenvalues=emb.eigenvalues, **params)
    return sidecar


def load_embedding(path: str | PathLike) -> Embedding:
    path = Path(path)
    Y = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2).T
    sidecar = path.with_suffix(path.suffix + ".npz")
    eigenvalues = np.full(Y.shape[0], np.nan)
    params = {}
    if sidecar.exists():
        with np.load(sidecar) as data:
            eigenvalues = data["eigenvalues"]
            params = {key: data[key].item() for key in data.files if key != "eigenvalues"}
    return Embedding(Y=Y, eigenvalues=eigenvalues, params=params)
