import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from scipy import sparse

from llec.geometry import knn
from llec.lle import (
    CorankError,
    EmbedCostMatrix,
    build_cost_matrix,
    count_components,
    cycle_laplacian,
    embed,
    load_embedding,
    perturb,
    run_lle,
    save_embedding,
    solve_weights,
)

from .conftest import bfs_components, separated_blobs, two_triangles


def weights_for(X, k, reg_tol=1e-3):
    X = np.asarray(X, dtype=float)
    return solve_weights(X, knn(X, k), reg_tol)


def test_midpoint_weights_equal():
    W = weights_for([[0.0, -1.0, 1.0]], 2).toarray()
    np.testing.assert_allclose(W[0, 1:], [0.5, 0.5], atol=1e-12, rtol=0)


def test_affine_weights_two_neighbors():
    # x = 0 with neighbors -1 and 3.  Unregularized: w = (0.75, 0.25).
    # Regularized by hand: C = [[1, -3], [-3, 9]], tr = 10, C + 0.01 I;
    # C^-1 e is proportional to (9.01 + 3, 3 + 1.01) = (12.01, 4.01).
    W = weights_for([[0.0, -1.0, 3.0]], 2).toarray()
    np.testing.assert_allclose(W[0, 1:], [12.01 / 16.02, 4.01 / 16.02], rtol=1e-12)
    assert np.max(np.abs(W[0, 1:] - [0.75, 0.25])) < 0.01


def test_weights_structure():
    rng = np.random.default_rng(0)
    X = rng.random((3, 40))
    g = knn(X, 5)
    W = solve_weights(X, g)
    np.testing.assert_allclose(np.asarray(W.sum(axis=1)).ravel(), 1.0, atol=1e-10)
    assert np.all(W.diagonal() == 0)
    assert np.all(np.diff(W.indptr) <= 5)
    for i in range(40):
        assert set(W[i].indices) <= set(g.neighbors[i])


def test_weights_reject_bad_tolerance():
    X = np.array([[0.0, 1.0, 2.0]])
    with pytest.raises(ValueError):
        solve_weights(X, knn(X, 1), 0.0)


def _random_rotation(rng, D):
    Q, R = np.linalg.qr(rng.standard_normal((D, D)))
    return Q * np.sign(np.diag(R))


@given(st.integers(0, 10_000))
def test_weights_translation_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((3, 25))
    W = weights_for(X, 4).toarray()
    shifted = weights_for(X + rng.normal(size=(3, 1)) * 5, 4).toarray()
    rotated = weights_for(_random_rotation(rng, 3) @ X, 4).toarray()
    np.testing.assert_allclose(shifted, W, atol=1e-8, rtol=0)
    np.testing.assert_allclose(rotated, W, atol=1e-8, rtol=0)


def test_cost_matrix_examples():
    assert np.array_equal(build_cost_matrix(sparse.csr_matrix((3, 3))).M.toarray(), np.eye(3))
    W = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_array_equal(build_cost_matrix(W).M.toarray(), [[2, -2], [-2, 2]])


@given(st.integers(0, 10_000), st.integers(2, 6))
def test_cost_matrix_properties(seed, k):
    rng = np.random.default_rng(seed)
    X = rng.random((3, 30))
    W = weights_for(X, k)
    M = build_cost_matrix(W).M.toarray()
    # independent dense product
    A = np.eye(30) - W.toarray()
    np.testing.assert_allclose(M, A.T @ A, atol=1e-12)
    np.testing.assert_allclose(M, M.T, atol=1e-12)
    np.testing.assert_allclose(M.sum(axis=1), 0, atol=1e-10)
    for v in rng.standard_normal((5, 30)):
        assert v @ M @ v >= -1e-10 * (v @ v)


def test_cycle_laplacian_small():
    np.testing.assert_array_equal(cycle_laplacian(2).toarray(), [[1, -1], [-1, 1]])
    expected = np.array([[1, -1, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 1]])
    np.testing.assert_array_equal(cycle_laplacian(4).toarray(), expected)
    closed = cycle_laplacian(4, closed=True).toarray()
    assert closed[0, 3] == closed[3, 0] == -1 and np.all(np.diag(closed) == 2)
    with pytest.raises(ValueError):
        cycle_laplacian(1)


@pytest.mark.parametrize("p", [2, 3, 7, 50])
@pytest.mark.parametrize("closed", [False, True])
def test_cycle_laplacian_zero_rows_psd(p, closed):
    T = cycle_laplacian(p, closed=closed).toarray()
    np.testing.assert_array_equal(T.sum(axis=1), 0)
    np.testing.assert_array_equal(T, T.T)
    assert np.linalg.eigvalsh(T)[0] > -1e-12


def test_perturb_is_lambda_t():
    cost = build_cost_matrix(weights_for(two_triangles(), 2))
    pert = perturb(cost, 1e-9)
    np.testing.assert_allclose((pert.M - cost.M).toarray(), 1e-9 * cycle_laplacian(6).toarray(),
                               atol=1e-24)
    assert pert.perturbed and pert.lam == 1e-9
    with pytest.raises(ValueError):
        perturb(cost, 0.0)


def test_two_triangles_corank_repair():
    X = two_triangles()
    g = knn(X, 2)
    assert bfs_components(g.neighbors) == 2
    cost = build_cost_matrix(solve_weights(X, g))
    assert count_components(cost) == 2
    for closed in (False, True):
        vals = np.linalg.eigvalsh(perturb(cost, 1e-9, closed=closed).M.toarray())
        assert abs(vals[0]) < 1e-14
        assert vals[1] > 1e-12


@pytest.mark.parametrize("c", [1, 2, 3, 4])
def test_count_components_matches_bfs(c):
    X = separated_blobs(c, per=6, seed=c)
    g = knn(X, 2)
    cost = build_cost_matrix(solve_weights(X, g))
    assert count_components(cost) == bfs_components(g.neighbors)


def test_count_components_line():
    X = np.linspace(0, 1, 10)[np.newaxis, :]
    assert count_components(build_cost_matrix(weights_for(X, 2))) == 1


def test_embed_three_colinear_points():
    # Reflection i -> 2 - i maps the problem to itself, so the non-constant
    # eigenvectors are symmetric or antisymmetric; the only antisymmetric unit
    # vector orthogonal to the constant is (1, 0, -1)/sqrt(2), and it has the
    # smaller eigenvalue (the symmetric one, (1, -2, 1)/sqrt(6), reconstructs badly).
    X = np.array([[0.0, 1.0, 2.0]])
    emb = run_lle(X, k=2, d=1)
    y = emb.Y[0]
    assert emb.Y.shape == (1, 3)
    np.testing.assert_allclose(np.abs(y), [2**-0.5, 0, 2**-0.5], atol=1e-8)
    assert abs(y.sum()) < 1e-8 and abs(y @ y - 1) < 1e-8
    assert np.all(np.diff(y) > 0) or np.all(np.diff(y) < 0)


def test_embed_requires_perturbation_when_disconnected():
    X = two_triangles()
    with pytest.raises(CorankError):
        run_lle(X, k=2, d=1, lam=0.0)
    emb = run_lle(X, k=2, d=1, lam=1e-9)
    assert emb.Y.shape == (1, 6)


def test_run_lle_is_composition():
    X = np.array([[0.0, 1.0, 2.0, 3.5, 5.0]])
    cost = perturb(build_cost_matrix(solve_weights(X, knn(X, 2), 1e-3)), 1e-9)
    manual = embed(cost, 1)
    auto = run_lle(X, k=2, d=1)
    np.testing.assert_array_equal(manual.Y, auto.Y)
    assert auto.params == {"k": 2, "d": 1, "lam": 1e-9, "reg_tol": 1e-3, "closed_cycle": False}


def _dense_oracle(X, k, d):
    W = weights_for(X, k).toarray()
    p = W.shape[0]
    A = np.eye(p) - W
    M = A.T @ A + 1e-9 * cycle_laplacian(p).toarray()
    vals, vecs = np.linalg.eigh(M)
    return vals[1:d + 1], vecs[:, 1:d + 1]


@given(st.integers(0, 10_000), st.integers(9, 12))
def test_arpack_matches_dense(seed, p):
    rng = np.random.default_rng(seed)
    X = rng.random((3, p))
    vals, vecs = _dense_oracle(X, 4, 2)
    cost = perturb(build_cost_matrix(weights_for(X, 4)), 1e-9)
    emb = embed(cost, 2, solver="arpack")
    np.testing.assert_allclose(emb.eigenvalues, vals, atol=1e-8)
    assert np.max(scipy.linalg.subspace_angles(emb.Y.T, vecs)) < 1e-6


@given(st.integers(0, 10_000))
def test_embedding_constraints(seed):
    rng = np.random.default_rng(seed)
    X = rng.random((3, 40))
    emb = run_lle(X, k=5, d=3)
    np.testing.assert_allclose(emb.Y.sum(axis=1), 0, atol=1e-8)
    np.testing.assert_allclose(emb.Y @ emb.Y.T, np.eye(3), atol=1e-8)
    assert np.all(np.diff(emb.eigenvalues) >= 0)


def test_embed_rejects_bad_dimension():
    cost = perturb(build_cost_matrix(weights_for(two_triangles(), 2)), 1e-9)
    with pytest.raises(ValueError):
        embed(cost, 6)
    with pytest.raises(ValueError):
        embed(cost, 1, solver="lanczos")


def test_embed_rejects_nonconstant_bottom_vector():
    # identity has no zero-row-sum structure at all
    cost = EmbedCostMatrix(M=sparse.identity(5, format="csr"), lam=1.0, perturbed=True)
    with pytest.raises(CorankError):
        embed(cost, 1)


def test_large_path_uses_arpack_and_agrees_with_dense():
    rng = np.random.default_rng(5)
    X = rng.random((3, 600))
    cost = perturb(build_cost_matrix(weights_for(X, 6)), 1e-9)
    sparse_emb = embed(cost, 2)
    dense_emb = embed(cost, 2, solver="dense")
    np.testing.assert_allclose(sparse_emb.eigenvalues, dense_emb.eigenvalues, rtol=1e-6)
    assert np.max(scipy.linalg.subspace_angles(sparse_emb.Y.T, dense_emb.Y.T)) < 1e-6


def test_embedding_files(tmp_path):
    emb = run_lle(np.random.default_rng(2).random((3, 30)), k=5, d=2)
    sidecar = save_embedding(tmp_path / "emb.csv", emb)
    assert sidecar.exists()
    rows = (tmp_path / "emb.csv").read_text().splitlines()
    assert len(rows) == 30 and all(len(r.split(",")) == 2 for r in rows)
    back = load_embedding(tmp_path / "emb.csv")
    np.testing.assert_array_equal(back.Y, emb.Y)
    np.testing.assert_array_equal(back.eigenvalues, emb.eigenvalues)
    assert back.params == emb.params


@pytest.mark.parametrize("c", [2, 3])
def test_count_components_after_perturbation(c):
    X = separated_blobs(c, per=6, seed=c)
    g = knn(X, 2)
    cost = build_cost_matrix(solve_weights(X, g))
    assert count_components(cost) == bfs_components(g.neighbors)
    assert count_components(perturb(cost, 1e-9)) == 1
