"""Synthetic data: the translated-square torus and labelled line clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TorusSpec:
    bg_size: int = 20
    block_size: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.block_size <= self.bg_size:
            raise ValueError("need 0 < block_size <= bg_size")


def torus_offsets(spec: TorusSpec) -> np.ndarray:
    """Block offsets ``(row, col)`` in the order frames are generated."""
    n = spec.bg_size
    i, j = np.divmod(np.arange(n * n), n)
    return np.stack([i, j], axis=1)


def torus_frame(background: np.ndarray, block_size: int, offset) -> np.ndarray:
    n = background.shape[0]
    frame = background.copy()
    rows = (offset[0] + np.arange(block_size)) % n
    cols = (offset[1] + np.arange(block_size)) % n
    frame[np.ix_(rows, cols)] = 0.0
    return frame


def torus_dataset(spec: TorusSpec = TorusSpec()) -> np.ndarray:
    """Frames of a zero block translated (with wrapping) over fixed noise.

    One fixed uniform [0, 1) background is drawn from ``spec.seed``; the
    block is placed at every offset in row-major order.  Returns a
    ``(bg_size**2, bg_size**2)`` cloud whose column ``i * bg_size + j`` is
    the flattened frame with the block at ``(i, j)``.
    """
    n = spec.bg_size
    background = np.random.default_rng(spec.seed).random((n, n))
    frames = [torus_frame(background, spec.block_size, off).ravel() for off in torus_offsets(spec)]
    return np.stack(frames, axis=1)


def torus_adjacent(spec: TorusSpec = TorusSpec()) -> np.ndarray:
    """Indices of the 4 toroidally adjacent frames of every frame, ``(p, 4)``."""
    n = spec.bg_size
    i, j = torus_offsets(spec).T
    return np.stack(
        [((i - 1) % n) * n + j, ((i + 1) % n) * n + j, i * n + (j - 1) % n, i * n + (j + 1) % n],
        axis=1,
    )


@dataclass(frozen=True)
class LineCloudSpec:
    """Points sampled along affine lines, one flat color per line.

    Line ``j`` passes through a center on a circle of radius ``spacing``
    (in the first two coordinates) with a seeded random direction, or the
    explicit ``centers``/``directions`` when given.
    """

    num_lines: int = 3
    points_per_line: int = 100
    ambient_dim: int = 2
    noise_sigma: float = 0.01
    color_per_line: tuple = ((0.9, 0.1, 0.1), (0.1, 0.9, 0.1), (0.1, 0.1, 0.9))
    seed: int = 0
    length: float = 1.0
    spacing: float = 2.0
    centers: tuple | None = None
    directions: tuple | None = None

    def __post_init__(self):
        if self.num_lines < 1:
            raise ValueError("num_lines must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if len(self.color_per_line) < self.num_lines:
            raise ValueError("need one color per line")


def line_cloud(spec: LineCloudSpec):
    """Sample a labelled line cloud.

    Returns
    -------
    colors : ndarray, shape (C, p)
    positions : ndarray, shape (ambient_dim, p)
    labels : ndarray, shape (p,)
    """
    rng = np.random.default_rng(spec.seed)
    n, m, dim = spec.num_lines, spec.points_per_line, spec.ambient_dim
    if spec.centers is not None:
        centers = np.asarray(spec.centers, dtype=np.float64).reshape(n, dim)
    else:
        centers = np.zeros((n, dim))
        angle = 2 * np.pi * np.arange(n) / n
        centers[:, 0] = spec.spacing * np.cos(angle)
        if dim > 1:
            centers[:, 1] = spec.spacing * np.sin(angle)
    if spec.directions is not None:
        directions = np.asarray(spec.directions, dtype=np.float64).reshape(n, dim)
    else:
        directions = rng.standard_normal((n, dim))
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)

    t = rng.uniform(-spec.length / 2, spec.length / 2, size=(n, m))
    pos = centers[:, np.newaxis, :] + t[..., np.newaxis] * directions[:, np.newaxis, :]
    pos = pos + spec.noise_sigma * rng.standard_normal(pos.shape)
    labels = np.repeat(np.arange(n), m)
    colors = np.asarray(spec.color_per_line[:n], dtype=np.float64)[labels]
    return colors.T.copy(), pos.reshape(n * m, dim).T.copy(), labels


REGION_COLORS = ((0.1, 0.1, 0.1), (0.9, 0.1, 0.1), (0.1, 0.9, 0.1), (0.1, 0.1, 0.9), (0.9, 0.9, 0.9))


def flat_regions_image(size: int = 64, colors=REGION_COLORS, noise: float = 0.02, seed: int = 0):
    """8-bit test image of flat color regions plus uniform per-channel noise.

    The top half is split into two regions and the bottom half into the
    remaining ones, left to right.  Noise is uniform in ``[-noise, noise]``
    before rounding to 8 bits.

    Returns
    -------
    img : ndarray, shape (size, size, 3), uint8
    labels : ndarray, shape (size, size)
        Region index of every pixel.
    """
    colors = np.asarray(colors, dtype=np.float64)
    n = len(colors)
    if n < 2:
        raise ValueError("need at least two regions")
    top = n // 2
    bottom = n - top
    yy, xx = np.mgrid[0:size, 0:size]
    upper = np.minimum(xx * top // size, top - 1)
    lower = top + np.minimum(xx * bottom // size, bottom - 1)
    labels = np.where(yy < size // 2, upper, lower)
    rng = np.random.default_rng(seed)
    img = colors[labels] + rng.uniform(-noise, noise, size=(size, size, 3))
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8), labels
