import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from parcomp import linop, prox
from parcomp.selftest import catalog, prox_violations


def test_box_examples():
    assert np.array_equal(prox.prox_box([-0.5, 0.5, 1.5], 0, 1), [0, 0.5, 1])
    x = np.array([0.1, 0.9, 0.0])
    assert np.array_equal(prox.prox_box(x, 0, 1), x)
    with pytest.raises(ValueError):
        prox.prox_box(x, 1, 0)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8))
def test_box_idempotent(xs):
    p = prox.prox_box(xs, 0, 1)
    assert np.array_equal(prox.prox_box(p, 0, 1), p)


def test_l1_examples():
    assert np.allclose(prox.prox_l1([3.0], 1.0), [2.0])
    assert np.allclose(prox.prox_l1([0.5], 1.0), [0.0])
    assert np.allclose(prox.prox_l1([-2, 0.1, 4], 0.5), [-1.5, 0, 3.5])
    with pytest.raises(ValueError):
        prox.prox_l1([1.0], 0.0)


def test_group_l12_examples():
    assert np.allclose(prox.prox_group_l12(np.array([[3.0, 4.0]]), 1.0), [[2.4, 3.2]])
    assert np.allclose(prox.prox_group_l12(np.array([[0.3, 0.4]]), 1.0), [[0.0, 0.0]])
    assert np.array_equal(prox.prox_group_l12(np.zeros((1, 3)), 2.0), np.zeros((1, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 4), st.floats(0.01, 5.0), st.integers(0, 2**31 - 1))
def test_group_l12_never_increases_row_norms(rows, cols, gamma, seed):
    X = np.random.default_rng(seed).standard_normal((rows, cols)) * 3
    P = prox.prox_group_l12(X, gamma)
    assert np.all(np.linalg.norm(P, axis=1) <= np.linalg.norm(X, axis=1) + 1e-15)


def test_group_l12_channel_layout():
    # two channels of length 3: rows gather (u_i, u_{i+3})
    phi = prox.group_l12(3, 2, 1.0)
    u = np.array([3.0, 0.3, 0.0, 4.0, 0.4, 0.0])
    assert phi.value(u) == pytest.approx(5.0 + 0.5)
    assert np.allclose(phi.prox(u, 1.0), [2.4, 0, 0, 3.2, 0, 0])


def test_zero_indicator():
    rng = np.random.default_rng(0)
    assert np.array_equal(prox.prox_zero_indicator(np.array([1.0, -2.0])), [0.0, 0.0])
    assert np.array_equal(prox.prox_zero_indicator(np.zeros(3)), np.zeros(3))
    assert np.array_equal(prox.prox_zero_indicator(rng.standard_normal(4), 10.0), np.zeros(4))


def test_prox_scaled_examples():
    absval = prox.l1(1, 1.0)
    x = np.array([0.7])
    assert np.allclose(prox.prox_scaled(absval, 1.0, x, 0.3), absval.prox(x, 0.3))
    # argmin 0.5 (t - 3)^2 + 2|t|
    t = minimize_scalar(lambda t: 0.5 * (t - 3) ** 2 + 2 * abs(t), bounds=(-5, 5),
                        method="bounded", options={"xatol": 1e-10}).x
    assert prox.prox_scaled(absval, 2.0, np.array([3.0]), 1.0)[0] == pytest.approx(1.0)
    assert t == pytest.approx(1.0, abs=1e-6)
    assert prox.prox_scaled(prox.box(1, 0, 1), 2.0, np.array([1.0]), 1.0)[0] == pytest.approx(0.5)


def test_dual_prox_step_examples():
    s = np.array([0.3, -7.0])
    assert np.array_equal(prox.dual_prox_step(s, 0.4, prox.zero_indicator(2)), s)
    absval = prox.l1(1, 1.0)
    assert prox.dual_prox_step(np.array([0.4]), 1.0, absval)[0] == pytest.approx(0.4)
    assert prox.dual_prox_step(np.array([3.0]), 1.0, absval)[0] == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.1, 3.0), st.integers(0, 2**31 - 1))
def test_dual_prox_step_of_weighted_l1_is_clip(gamma, weight, seed):
    # conjugate of w||.||_1 is the indicator of [-w, w]^n
    s = np.random.default_rng(seed).standard_normal(6) * 4
    out = prox.dual_prox_step(s, gamma, prox.l1(6, weight))
    assert np.allclose(out, np.clip(s, -weight, weight), atol=1e-12)


def test_quadratic_data_gradient(rng):
    n = 4
    I = linop.identity(n)
    x = rng.standard_normal(n)
    assert np.allclose(prox.quadratic_data_gradient(I, np.zeros(n), x), x)
    A = rng.standard_normal((3, n))
    T = linop.matrix(A)
    assert np.allclose(prox.quadratic_data_gradient(T, A @ x, x), 0)
    y = rng.standard_normal(3)
    term = prox.quadratic_data(T, y)
    h = 1e-6
    fd = [(term.value(x + h * e) - term.value(x - h * e)) / (2 * h) for e in np.eye(n)]
    assert np.allclose(term.gradient(x), fd, atol=1e-6)
    assert term.lipschitz == pytest.approx(
        linop.estimate_norm(T).upper_bound ** 2)
    with pytest.raises(ValueError):
        prox.quadratic_data(T, np.ones(5))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_quadratic_gradient_monotone_and_lipschitz(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((5, 4))
    term = prox.quadratic_data(linop.matrix(A), rng.standard_normal(5))
    x, y = rng.standard_normal((2, 4))
    gx, gy = term.gradient(x), term.gradient(y)
    assert np.dot(x - y, gx - gy) >= -1e-12
    assert np.linalg.norm(gx - gy) <= term.lipschitz * np.linalg.norm(x - y) * (1 + 1e-9)


@pytest.mark.parametrize("name", sorted(catalog()))
def test_catalog_prox_properties(name):
    v = prox_violations(catalog()[name], n_probes=100, seed=7)
    assert v["firm"] <= 1e-10
    assert v["subgradient"] <= 1e-9
    assert v["moreau"] <= 1e-12


def test_literal_norm_prox_formula_is_not_firmly_nonexpansive():
    # (1 - 1/||x||) x without the max guard flips small vectors through the origin
    def literal(x):
        return (1 - 1 / np.linalg.norm(x)) * x
    x, y = np.array([0.1, 0.0]), np.array([-0.1, 0.0])
    d = literal(x) - literal(y)
    assert d @ d > (x - y) @ d
    row = prox.prox_group_l12(np.array([x, y]), 1.0)
    assert np.array_equal(row, np.zeros((2, 2)))


def test_scaled_requires_positive_rho():
    with pytest.raises(ValueError):
        prox.scaled(prox.l1(2), 0.0)


def test_l1_with_zero_weight_is_zero_function():
    phi = prox.l1(3, 0.0)
    x = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(phi.prox(x, 5.0), x) and phi.value(x) == 0.0
