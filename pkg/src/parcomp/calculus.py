"""Parallel sums and parallel compositions of SPD linear operators.

Restricting to symmetric positive-definite matrices makes every inverse in
``A [] B = (A^-1 + B^-1)^-1`` and ``L |> A = (L A^-1 L^*)^-1`` single
valued, so the operator identities can be checked entry by entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

SYM_TOL = 1e-12
LEMMA_TOL = 1e-8


class UndefinedComposition(ValueError):
    pass


def _symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SpdOperator:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"SPD operator must be square, got {M.shape}")
        scale = max(1.0, np.abs(M).max(initial=0.0))
        if np.abs(M - M.T).max(initial=0.0) > SYM_TOL * scale:
            raise ValueError("SPD operator is not symmetric")
        if np.linalg.eigvalsh(_symmetrize(M))[0] <= 0:
            raise ValueError("SPD operator is not positive definite")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def inverse(self) -> np.ndarray:
        return _spd_solve(self.matrix, np.eye(self.dim))

    def resolvent(self, x, gamma: float = 1.0) -> np.ndarray:
        """``(Id + gamma A)^-1 x``."""
        return np.linalg.solve(np.eye(self.dim) + gamma * self.matrix, x)


@dataclass(frozen=True)
class DenseMap:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.float64)
        if M.ndim != 2:
            raise ValueError("DenseMap needs a 2-D array")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)


def _spd_solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    lu, piv = sla.lu_factor(A)
    return sla.lu_solve((lu, piv), B)


def parallel_sum(A: SpdOperator, B: SpdOperator) -> SpdOperator:
    """``(A^-1 + B^-1)^-1``, evaluated as ``A (A+B)^-1 B``."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    S = A.matrix @ _spd_solve(A.matrix + B.matrix, B.matrix)
    return SpdOperator(_symmetrize(S))


def parallel_composition(L: DenseMap, A: SpdOperator) -> SpdOperator:
    """``(L A^-1 L^T)^-1``; requires ``L`` of full row rank."""
    Lm = L.matrix
    if Lm.shape[1] != A.dim:
        raise ValueError(f"L has {Lm.shape[1]} columns, A has dimension {A.dim}")
    if np.linalg.matrix_rank(Lm) < Lm.shape[0]:
        raise UndefinedComposition(
            "parallel composition undefined as single-valued map "
            "(L is not of full row rank)")
    inner = _symmetrize(Lm @ _spd_solve(A.matrix, Lm.T))
    return SpdOperator(_symmetrize(_spd_solve(inner, np.eye(inner.shape[0]))))


def direct_sum(A: SpdOperator, B: SpdOperator) -> SpdOperator:
    """``A x B`` acting on ``H (+) H``."""
    return SpdOperator(sla.block_diag(A.matrix, B.matrix))


def compose_maps(M: DenseMap, L: DenseMap) -> DenseMap:
    return DenseMap(M.matrix @ L.matrix)


def random_spd(rng: np.random.Generator, n: int, cond: float = 10.0) -> SpdOperator:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    return SpdOperator(_symmetrize((Q * eig) @ Q.T))


def random_full_row_rank(rng: np.random.Generator, rows: int, cols: int) -> DenseMap:
    while True:
        L = rng.standard_normal((rows, cols))
        if np.linalg.cond(L) < 1e3:
            return DenseMap(L)


@dataclass
class LemmaReport:
    seed: int
    dim: int
    discrepancies: dict[str, float] = field(default_factory=dict)
    tol: float = LEMMA_TOL

    @property
    def max_discrepancy(self) -> float:
        return max(self.discrepancies.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tol

    def lines(self) -> list[str]:
        return [f"{name:<34s} {err:.3e}  {'ok' if err <= self.tol else 'FAIL'}"
                for name, err in self.discrepancies.items()]


def _gap(P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.abs(_symmetrize(P) - _symmetrize(Q)).max())


def check_lemma_suite(seed: int, dim: int) -> LemmaReport:
    """Evaluate both sides of the parallel-sum / parallel-composition identities.

    Identities checked on seeded random SPD operators and full-row-rank maps:

    * sum-map composition:  ``S |> (A x B) = A [] B`` with ``S(x, y) = x + y``
    * inverse formula:      ``((L |> A) [] B)^-1 = L A^-1 L^* + B^-1``
    * distributivity:       ``L |> (A [] B) = (L |> A) [] (L |> B)``
    * chaining:             ``M |> (L |> A) = (M L) |> A``

    Failures are reported, never raised.
    """
    if dim < 2:
        raise ValueError("lemma suite needs dim >= 2")
    rng = np.random.default_rng(seed)
    rep = LemmaReport(seed, dim)
    n = dim
    A = random_spd(rng, n)
    B = random_spd(rng, n)

    S = DenseMap(np.hstack([np.eye(n), np.eye(n)]))
    rep.discrepancies["sum-map composition"] = _gap(
        parallel_composition(S, direct_sum(A, B)).matrix, parallel_sum(A, B).matrix)

    g = max(1, n - 1)
    L = random_full_row_rank(rng, g, n)
    Bg = random_spd(rng, g)
    lhs = np.linalg.inv(parallel_sum(parallel_composition(L, A), Bg).matrix)
    rhs = L.matrix @ np.linalg.inv(A.matrix) @ L.matrix.T + np.linalg.inv(Bg.matrix)
    rep.discrepancies["inverse of composed parallel sum"] = _gap(lhs, rhs)

    rep.discrepancies["distributivity over parallel sum"] = _gap(
        parallel_composition(L, parallel_sum(A, B)).matrix,
        parallel_sum(parallel_composition(L, A), parallel_composition(L, B)).matrix)

    k = max(1, g - 1)
    M = random_full_row_rank(rng, k, g)
    rep.discrepancies["chained composition"] = _gap(
        parallel_composition(M, parallel_composition(L, A)).matrix,
        parallel_composition(compose_maps(M, L), A).matrix)
    return rep


def check_all(seeds=range(10), dims=(2, 3, 4)) -> list[LemmaReport]:
    return [check_lemma_suite(s, d) for d in dims for s in seeds]
