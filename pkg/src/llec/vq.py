"""Linde-Buzo-Gray vector quantization and its center initializers."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from os import PathLike

import numpy as np

from .geometry import as_cloud

INITIALIZERS = ("llec-palette", "hand-identified", "random-rgb", "random-from-data")


@dataclass(frozen=True)
class Codebook:
    """Centers as columns, shape ``(D, n)``."""

    centers: np.ndarray
    origin: str = ""

    @property
    def n(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class Initializer:
    kind: str = "random-from-data"
    n: int = 25
    seed: int = 0
    palette: np.ndarray | None = None
    hand_colors: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in INITIALIZERS:
            raise ValueError(f"unknown initializer {self.kind!r}; choose from {INITIALIZERS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")


@dataclass(frozen=True)
class LBGResult:
    codebook: Codebook
    assignment: np.ndarray
    history: np.ndarray
    distortion: float

    @property
    def iterations(self) -> int:
        return self.history.size


def load_hand_colors(path: str | PathLike | None = None) -> np.ndarray:
    """The 17 supplementary hand-picked colors as a ``(3, 17)`` array in [0, 1].

    ``path`` overrides the bundled table; it must have the same JSON layout.
    """
    if path is None:
        text = resources.files("llec").joinpath("data/hand_colors.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    colors = json.loads(text)["colors"]
    return np.array(list(colors.values()), dtype=np.float64).T / 255.0


def cube_corners() -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=3))).T


def init_centers(X, init: Initializer) -> Codebook:
    """Starting codebook for :func:`lbg`.

    ``llec-palette`` takes ``init.palette`` (prototype columns from an LLEC
    clustering), ``hand-identified`` the 8 color-cube corners followed by
    the hand-picked colors, ``random-rgb`` ``n`` uniform colors and
    ``random-from-data`` ``n`` distinct columns of ``X``.
    """
    X = as_cloud(X)
    D, p = X.shape
    rng = np.random.default_rng(init.seed)
    if init.kind == "llec-palette":
        if init.palette is None:
            raise ValueError("llec-palette initialization needs a palette")
        centers = as_cloud(init.palette)
    elif init.kind == "hand-identified":
        extra = init.hand_colors if init.hand_colors is not None else load_hand_colors()
        centers = np.concatenate([cube_corners(), as_cloud(extra)], axis=1)
    elif init.kind == "random-rgb":
        centers = rng.random((D, init.n))
    else:
        if init.n > p:
            raise ValueError(f"cannot draw {init.n} distinct centers from {p} points")
        centers = X[:, rng.choice(p, size=init.n, replace=False)]
    if centers.shape[0] != D:
        raise ValueError(f"centers have dimension {centers.shape[0]}, data has {D}")
    return Codebook(centers=centers.copy(), origin=init.kind)


def nearest_center(X, centers) -> tuple[np.ndarray, np.ndarray]:
    """Index of and squared distance to the nearest center (ties: lowest index)."""
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(centers, dtype=np.float64)
    D, p = X.shape
    n = C.shape[1]
    labels = np.empty(p, dtype=np.intp)
    best = np.empty(p)
    step = max(1, 2**22 // max(1, n * D))
    for start in range(0, p, step):
        stop = min(p, start + step)
        diff = X.T[start:stop, np.newaxis, :] - C.T[np.newaxis, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        labels[start:stop] = np.argmin(d2, axis=1)
        best[start:stop] = d2[np.arange(stop - start), labels[start:stop]]
    return labels, best


def distortion(X, centers, assignment) -> float:
    """Mean squared distance from each point to its assigned center."""
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(centers, dtype=np.float64)
    R = X - C[:, np.asarray(assignment)]
    return float(np.einsum("ij,ij->", R, R) / X.shape[1])


def frobenius_error(X, centers, assignment) -> float:
    """Squared Frobenius norm of ``X - X*``; equals ``p * distortion``."""
    Xq = np.asarray(centers, dtype=np.float64)[:, np.asarray(assignment)]
    return float(np.linalg.norm(np.asarray(X, dtype=np.float64) - Xq, "fro") ** 2)


def lbg(X, codebook: Codebook, max_iters: int = 15, stop_tol: float = 0.0,
        empty: str = "keep") -> LBGResult:
    """Iterate nearest-center assignment and center-mean updates.

    ``history[t]`` is the distortion of the assignment made in iteration
    ``t`` to the centers entering that iteration; it never increases.  The
    loop stops after ``max_iters`` iterations, when the centers stop
    moving, or when the relative improvement over the previous iteration
    drops below ``stop_tol``.

    ``empty`` decides what happens to a center whose region is empty:
    ``"keep"`` leaves it in place, ``"farthest"`` moves it onto the point
    farthest from its assigned center.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if empty not in ("keep", "farthest"):
        raise ValueError("empty must be 'keep' or 'farthest'")
    X = as_cloud(X)
    p = X.shape[1]
    C = codebook.centers.astype(np.float64).copy()
    n = C.shape[1]
    history = []
    for _ in range(max_iters):
        labels, d2 = nearest_center(X, C)
        D = float(d2.sum() / p)
        if history and history[-1] > 0 and (history[-1] - D) / history[-1] < stop_tol:
            history.append(D)
            break
        history.append(D)
        counts = np.bincount(labels, minlength=n)
        sums = np.zeros_like(C)
        np.add.at(sums.T, labels, X.T)
        new = C.copy()
        filled = counts > 0
        new[:, filled] = sums[:, filled] / counts[filled]
        if empty == "farthest":
            order = np.argsort(-d2, kind="stable")
            taken = set()
            for j in np.flatnonzero(~filled):
                idx = next(int(i) for i in order if int(i) not in taken)
                taken.add(idx)
                new[:, j] = X[:, idx]
        if np.array_equal(new, C):
            break
        C = new
    labels, d2 = nearest_center(X, C)
    return LBGResult(
        codebook=Codebook(centers=C, origin=codebook.origin),
        assignment=labels,
        history=np.array(history),
        distortion=float(d2.sum() / p),
    )


def save_history(path: str | PathLike, history) -> None:
    with open(path, "w") as fh:
        fh.write("iteration,distortion\n")
        for t, D in enumerate(history, 1):
            fh.write(f"{t},{D:.17g}\n")
