import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parcomp.calculus import (DenseMap, SpdOperator, UndefinedComposition, check_all,
                              check_lemma_suite, direct_sum, parallel_composition,
                              parallel_sum, random_full_row_rank, random_spd)

seeds = st.integers(0, 2**31 - 1)
dims = st.integers(2, 5)


def test_spd_validation():
    with pytest.raises(ValueError):
        SpdOperator(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        SpdOperator(np.diag([1.0, -1.0]))
    A = SpdOperator(np.diag([2.0, 4.0]))
    assert np.allclose(A.resolvent(np.array([3.0, 5.0]), 0.5), [1.5, 5.0 / 3.0])


def test_parallel_sum_scalar_and_equal_cases():
    a, b = 2.0, 3.0
    S = parallel_sum(SpdOperator(a * np.eye(3)), SpdOperator(b * np.eye(3)))
    assert np.allclose(S.matrix, a * b / (a + b) * np.eye(3))
    A = random_spd(np.random.default_rng(1), 3)
    assert np.allclose(parallel_sum(A, A).matrix, A.matrix / 2)


def test_parallel_sum_inverse_of_sum_of_inverses():
    rng = np.random.default_rng(2)
    A, B = random_spd(rng, 4), random_spd(rng, 4)
    ref = np.linalg.inv(np.linalg.inv(A.matrix) + np.linalg.inv(B.matrix))
    assert np.abs(parallel_sum(A, B).matrix - ref).max() <= 1e-10


def test_parallel_composition_examples():
    rng = np.random.default_rng(3)
    A = random_spd(rng, 4)
    assert np.allclose(parallel_composition(DenseMap(np.eye(4)), A).matrix, A.matrix)
    c = 2.5
    assert np.allclose(parallel_composition(DenseMap(c * np.eye(4)), A).matrix,
                       A.matrix / c**2)
    L = random_full_row_rank(rng, 2, 4)
    ref = np.linalg.inv(L.matrix @ np.linalg.inv(A.matrix) @ L.matrix.T)
    assert np.abs(parallel_composition(L, A).matrix - ref).max() <= 1e-10


def test_parallel_composition_rank_deficient():
    A = SpdOperator(np.eye(3))
    L = DenseMap(np.array([[1.0, 0, 0], [2.0, 0, 0]]))
    with pytest.raises(UndefinedComposition, match="undefined as single-valued"):
        parallel_composition(L, A)


def test_sum_map_lemma_with_scalar_operators():
    a, b, n = 2.0, 5.0, 3
    S = DenseMap(np.hstack([np.eye(n), np.eye(n)]))
    lhs = parallel_composition(S, direct_sum(SpdOperator(a * np.eye(n)),
                                             SpdOperator(b * np.eye(n))))
    assert np.allclose(lhs.matrix, a * b / (a + b) * np.eye(n))


def test_chained_composition_with_identities():
    A = random_spd(np.random.default_rng(4), 3)
    I = DenseMap(np.eye(3))
    assert np.allclose(parallel_composition(I, parallel_composition(I, A)).matrix, A.matrix)


def test_lemma_suite_seed_42_dim_3():
    rep = check_lemma_suite(42, 3)
    assert rep.discrepancies["distributivity over parallel sum"] <= 1e-8
    assert rep.passed and len(rep.lines()) == 4


def test_lemma_suite_rejects_dim_1():
    with pytest.raises(ValueError):
        check_lemma_suite(0, 1)


def test_full_suite():
    reports = check_all()
    assert len(reports) == 30
    assert max(r.max_discrepancy for r in reports) <= 1e-8


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_parallel_sum_commutative_associative(seed, n):
    rng = np.random.default_rng(seed)
    A, B, C = (random_spd(rng, n) for _ in range(3))
    assert np.abs(parallel_sum(A, B).matrix - parallel_sum(B, A).matrix).max() <= 1e-8
    lhs = parallel_sum(parallel_sum(A, B), C).matrix
    rhs = parallel_sum(A, parallel_sum(B, C)).matrix
    assert np.abs(lhs - rhs).max() <= 1e-8


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_parallel_sum_below_each_argument(seed, n):
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, n), random_spd(rng, n)
    S = parallel_sum(A, B).matrix
    assert np.linalg.eigvalsh(A.matrix - S).min() >= -1e-10
    assert np.linalg.eigvalsh(B.matrix - S).min() >= -1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_chains_stay_positive_semidefinite(seed, n):
    rng = np.random.default_rng(seed)
    A, B = random_spd(rng, n), random_spd(rng, n - 1)
    L = random_full_row_rank(rng, n - 1, n)
    out = parallel_sum(parallel_composition(L, A), B).matrix
    assert np.linalg.eigvalsh(out).min() >= -1e-12
