"""Images <-> point clouds, PPM/PNG files, palette files and quality reports.

Images are ``(height, width, 3)`` uint8 arrays.  Their clouds are ``(3, p)``
float arrays in [0, 1] with pixels in row-major order.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from os import PathLike
from pathlib import Path

import numpy as np

from .geometry import as_cloud
from .vq import distortion


class FormatError(ValueError):
    pass


def _check_image(img) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected an (height, width, 3) image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if np.any(img < 0) or np.any(img > 255) or np.any(img != np.round(img)):
            raise ValueError("image channels must be integers in 0..255")
        img = img.astype(np.uint8)
    return img


def image_to_cloud(img) -> tuple[np.ndarray, tuple[int, int]]:
    """Flatten an image to a ``(3, p)`` cloud in [0, 1]; also return ``(height, width)``."""
    img = _check_image(img)
    h, w, _ = img.shape
    return img.reshape(h * w, 3).T.astype(np.float64) / 255.0, (h, w)


def cloud_to_image(X, layout: tuple[int, int]) -> np.ndarray:
    """Inverse of :func:`image_to_cloud`: scale by 255, round half to even, clamp."""
    X = np.asarray(X, dtype=np.float64)
    h, w = layout
    if X.ndim != 2 or X.shape != (3, h * w):
        raise ValueError(f"cloud of shape {X.shape} does not fit a {h}x{w} RGB image")
    vals = np.clip(np.rint(X * 255.0), 0, 255).astype(np.uint8)
    return vals.T.reshape(h, w, 3)


def _ppm_tokens(data: bytes, count: int):
    """Parse ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset just past the single whitespace byte
    that ends the last token.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PPM header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise FormatError("PPM header must end with a single whitespace byte")
    return tokens, pos + 1


def decode_ppm(data: bytes) -> np.ndarray:
    tokens, offset = _ppm_tokens(data, 4)
    magic, width, height, maxval = tokens
    if magic != b"P6":
        raise FormatError(f"not a binary PPM (magic {magic!r})")
    try:
        w, h, maxv = int(width), int(height), int(maxval)
    except ValueError as exc:
        raise FormatError("malformed PPM header") from exc
    if w < 1 or h < 1:
        raise FormatError("PPM dimensions must be positive")
    if maxv != 255:
        raise FormatError(f"only maxval 255 is supported, got {maxv}")
    size = 3 * w * h
    raster = data[offset:offset + size]
    if len(raster) != size:
        raise FormatError(f"PPM raster has {len(raster)} bytes, expected {size}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def encode_ppm(img) -> bytes:
    img = _check_image(img)
    h, w, _ = img.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def read_image(path: str | PathLike) -> np.ndarray:
    """Read a PPM (P6) or, via Pillow, any RGB-convertible image such as PNG."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P6":
        return decode_ppm(data)
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_image(path: str | PathLike, img) -> None:
    path = Path(path)
    img = _check_image(img)
    if path.suffix.lower() in (".ppm", ".pnm"):
        path.write_bytes(encode_ppm(img))
        return
    from PIL import Image

    Image.fromarray(img, mode="RGB").save(path)


@dataclass(frozen=True)
class QualityReport:
    n_colors: int
    distortion: float
    total_squared_error: float
    unique_before: int
    unique_after: int

    def as_dict(self) -> dict:
        return asdict(self)


def _as_unit_image(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    return arr.astype(np.float64)


def quality_report(original, quantized, n_colors: int) -> QualityReport:
    """Distortion of a quantized image against its original.

    uint8 images are scaled to [0, 1]; float images are taken to be in
    [0, 1] already.  ``distortion`` is the mean squared color error per
    pixel, ``total_squared_error`` the squared Frobenius norm of the residual.
    """
    a = _as_unit_image(original)
    b = _as_unit_image(quantized)
    if a.shape != b.shape or a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"image shapes differ or are not RGB: {a.shape} vs {b.shape}")
    Xa = a.reshape(-1, 3).T
    Xb = b.reshape(-1, 3).T
    p = Xa.shape[1]
    # each pixel is its own "center"; shares the distortion implementation with vq
    D = distortion(Xa, Xb, np.arange(p))
    return QualityReport(
        n_colors=int(n_colors),
        distortion=D,
        total_squared_error=p * D,
        unique_before=int(np.unique(Xa.T, axis=0).shape[0]),
        unique_after=int(np.unique(Xb.T, axis=0).shape[0]),
    )


def to_byte_colors(centers) -> np.ndarray:
    """``(3, n)`` colors in [0, 1] to 0..255 integers (half to even, clamped)."""
    return np.clip(np.rint(np.asarray(centers, dtype=np.float64) * 255.0), 0, 255).astype(int)


def write_palette(path: str | PathLike, centers, counts=None) -> None:
    """Write ``id count r g b`` lines, one per center column, 0..255 channels."""
    rgb = to_byte_colors(as_cloud(centers))
    if rgb.shape[0] != 3:
        raise ValueError("palette centers must be RGB (3 rows)")
    n = rgb.shape[1]
    counts = np.zeros(n, dtype=int) if counts is None else np.asarray(counts, dtype=int)
    lines = [f"{i} {counts[i]} {r} {g} {b}" for i, (r, g, b) in enumerate(rgb.T)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_palette(path: str | PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read a palette file; return ``(centers, counts)`` with centers ``(3, n)`` in [0, 1]."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(f"{path}:{lineno}: expected 'id count r g b'")
        vals = [int(v) for v in parts]
        if any(not 0 <= v <= 255 for v in vals[2:]):
            raise FormatError(f"{path}:{lineno}: channel outside 0..255")
        rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: empty palette")
    rows.sort(key=lambda r: r[0])
    arr = np.array(rows)
    return arr[:, 2:].T.astype(np.float64) / 255.0, arr[:, 1]


def write_assignment(path: str | PathLike, assignment) -> None:
    np.savetxt(path, np.asarray(assignment, dtype=int), fmt="%d")


def read_assignment(path: str | PathLike) -> np.ndarray:
    return np.loadtxt(path, dtype=np.intp, ndmin=1)
