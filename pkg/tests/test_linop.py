import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parcomp import linop
from parcomp.imaging.ops import tv_map

from conftest import dense_diff_h


def test_identity_zero_scale_examples():
    assert np.array_equal(linop.apply(linop.identity(3), [1, 2, 3]), [1, 2, 3])
    assert np.array_equal(linop.apply(linop.zero(4, 2), np.ones(4)), np.zeros(2))
    assert np.allclose(linop.apply(linop.scale(linop.identity(2), 0.5), [2, 4]), [1, 2])
    assert np.array_equal(linop.adjoint(linop.identity(2), [1, 2]), [1, 2])


def test_dimension_mismatch_names_the_operator():
    L = linop.matrix(np.ones((2, 3)), tag="probe-op")
    with pytest.raises(ValueError, match="probe-op"):
        linop.apply(L, np.ones(4))
    with pytest.raises(ValueError, match="probe-op"):
        linop.adjoint(L, np.ones(3))


def test_horizontal_difference_adjoint_matches_dense_transpose(rng):
    TV = tv_map(3, 3)
    Dh = linop.LinearMap(9, 9, lambda x: TV.forward(x)[:9],
                         lambda u: TV.adjoint(np.concatenate([u, np.zeros(9)])), tag="Dh")
    D = dense_diff_h(3, 3)
    assert np.allclose(linop.to_dense(Dh), D)
    for _ in range(10):
        x, u = rng.standard_normal(9), rng.standard_normal(9)
        assert abs(np.dot(Dh(x), u) - np.dot(x, linop.adjoint(Dh, u))) < 1e-12
        assert np.allclose(linop.adjoint(Dh, u), D.T @ u, atol=1e-14)


def test_vstack_adjoint_is_sum_of_blocks(rng):
    A, B = rng.standard_normal((3, 4)), rng.standard_normal((2, 4))
    S = linop.vstack([linop.matrix(A), linop.matrix(B)])
    assert np.allclose(linop.to_dense(S), np.vstack([A, B]))
    u = rng.standard_normal(5)
    assert np.allclose(linop.adjoint(S, u), A.T @ u[:3] + B.T @ u[3:])


def test_block_grid_with_absent_entries(rng):
    A, B = rng.standard_normal((2, 3)), rng.standard_normal((4, 2))
    G = linop.block([[linop.matrix(A), None], [None, linop.matrix(B)]], [3, 2], [2, 4])
    dense = np.zeros((6, 5))
    dense[:2, :3], dense[2:, 3:] = A, B
    assert np.allclose(linop.to_dense(G), dense)
    assert np.allclose(linop.to_dense(G.T), dense.T)


def test_composition_and_operators(rng):
    A, B = rng.standard_normal((3, 4)), rng.standard_normal((4, 2))
    C = linop.matrix(A) @ linop.matrix(B)
    assert np.allclose(linop.to_dense(C), A @ B)
    assert np.allclose(linop.to_dense(-linop.matrix(A)), -A)
    assert np.allclose(linop.to_dense(2.0 * linop.matrix(A)), 2 * A)
    assert np.allclose(linop.to_dense(linop.matrix(A).T), A.T)


def test_norm_of_scaled_identity():
    est = linop.estimate_norm(linop.scale(linop.identity(5), 3.0))
    assert abs(est.value - 3.0) < 1e-8
    assert est.upper_bound == pytest.approx(3.0 * 1.01)
    assert est.converged


def test_norm_of_1d_difference_matches_svd():
    n = 8
    D = np.zeros((n, n))
    for i in range(n - 1):
        D[i, i], D[i, i + 1] = -1.0, 1.0
    est = linop.estimate_norm(linop.matrix(D), tol=1e-12, max_iter=10000)
    assert abs(est.value - np.linalg.svd(D, compute_uv=False)[0]) < 1e-6


def test_norm_of_zero_map():
    est = linop.estimate_norm(linop.zero(4, 3))
    assert est.value == 0.0 and est.upper_bound == 0.0 and est.converged


def test_norm_errors_and_nonconvergence():
    with pytest.raises(ValueError):
        linop.estimate_norm(linop.LinearMap(0, 2, lambda x: np.zeros(2), lambda u: np.zeros(0)))
    with pytest.raises(ValueError):
        linop.estimate_norm(linop.identity(2), tol=0.0)
    # two nearly equal singular values: power iteration cannot settle in 2 steps
    est = linop.estimate_norm(linop.matrix(np.diag([1.0, 0.999, 0.5])), tol=1e-15, max_iter=2)
    assert not est.converged and est.iterations == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_norm_estimate_brackets_true_norm(m, n, seed):
    A = np.random.default_rng(seed).standard_normal((m, n))
    true = np.linalg.svd(A, compute_uv=False)[0]
    est = linop.estimate_norm(linop.matrix(A), tol=1e-10, max_iter=5000, seed=seed)
    assert est.value <= true * (1 + 1e-6)
    assert est.upper_bound >= est.value >= 0
    if est.converged:
        assert est.value >= true * (1 - 1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_linearity_adjointness_and_psd(m, n, seed):
    rng = np.random.default_rng(seed)
    L = linop.matrix(rng.standard_normal((m, n)))
    x, y = rng.standard_normal((2, n))
    a, b = rng.standard_normal(2)
    lhs, rhs = L(a * x + b * y), a * L(x) + b * L(y)
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(1.0, np.linalg.norm(rhs))
    assert linop.adjoint_mismatch(L, 5, seed=seed) < 1e-10
    assert np.dot(x, linop.adjoint(L, L(x))) >= -1e-12
