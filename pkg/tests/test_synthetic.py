import numpy as np
import pytest

from llec.synthetic import (
    REGION_COLORS,
    LineCloudSpec,
    TorusSpec,
    flat_regions_image,
    line_cloud,
    torus_adjacent,
    torus_dataset,
)


def test_torus_defaults():
    X = torus_dataset()
    assert X.shape == (400, 400)
    first = X[:, 0].reshape(20, 20)
    assert np.all(first[:10, :10] == 0)
    assert np.all(first[10:, :] > 0) and np.all(first[:, 10:] > 0)


def test_torus_neighbors_differ_in_one_column_strip():
    X = torus_dataset()
    a = X[:, 0].reshape(20, 20) == 0
    b = X[:, 1].reshape(20, 20) == 0
    assert np.sum(a != b) == 20
    assert np.sum(X[:, 0] != X[:, 1]) == 20


def test_torus_wraps():
    X = torus_dataset(TorusSpec(bg_size=6, block_size=3, seed=1))
    last = X[:, 35].reshape(6, 6)
    zero = np.argwhere(last == 0)
    assert {tuple(z) for z in zero} == {(r, c) for r in (5, 0, 1) for c in (5, 0, 1)}


def test_torus_deterministic_and_adjacency():
    np.testing.assert_array_equal(torus_dataset(TorusSpec(seed=2)), torus_dataset(TorusSpec(seed=2)))
    adj = torus_adjacent()
    assert adj.shape == (400, 4)
    assert sorted(adj[0].tolist()) == [1, 19, 20, 380]
    with pytest.raises(ValueError):
        TorusSpec(bg_size=5, block_size=6)


def test_line_cloud_noiseless_colinear():
    colors, pos, labels = line_cloud(LineCloudSpec(noise_sigma=0.0))
    assert pos.shape == (2, 300) and colors.shape == (3, 300)
    for c in range(3):
        P = pos[:, labels == c]
        sv = np.linalg.svd(P - P.mean(axis=1, keepdims=True), compute_uv=False)
        assert sv[1] < 1e-12 * sv[0]
        assert len({tuple(x) for x in colors[:, labels == c].T}) == 1


def test_line_cloud_separation_and_validation():
    colors, pos, labels = line_cloud(LineCloudSpec(noise_sigma=0.01, seed=3))
    a, b = pos[:, labels == 0], pos[:, labels == 1]
    gap = np.min(np.linalg.norm(a[:, :, None] - b[:, None, :], axis=0))
    assert gap > 10 * 0.01
    with pytest.raises(ValueError):
        LineCloudSpec(noise_sigma=-1)
    with pytest.raises(ValueError):
        LineCloudSpec(num_lines=4)


def test_flat_regions():
    img, labels = flat_regions_image(size=32, noise=0.0)
    assert img.shape == (32, 32, 3) and img.dtype == np.uint8
    assert set(np.unique(labels)) == set(range(len(REGION_COLORS)))
    for r, color in enumerate(REGION_COLORS):
        expected = np.rint(np.array(color) * 255)
        assert np.all(img[labels == r] == expected)
    noisy, _ = flat_regions_image(size=32, noise=0.02, seed=1)
    assert np.max(np.abs(noisy.astype(int) - img.astype(int))) <= 6
    with pytest.raises(ValueError):
        flat_regions_image(colors=[(0, 0, 0)])
