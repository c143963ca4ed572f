"""Small problems with known solutions, shared by the self-test, tests and scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linop, prox
from .engine import CoupledProblem
from .parallel_sum import MinimizationProblem, composite_term

LASSO_B = (3.0, -0.2, 1.0)
LASSO_WEIGHT = 1.0


def soft_threshold(b, t):
    b = np.asarray(b, dtype=np.float64)
    return np.sign(b) * np.maximum(np.abs(b) - t, 0.0)


def lasso(b=LASSO_B, weight: float = LASSO_WEIGHT) -> MinimizationProblem:
    """``min_x weight ||x||_1 + ||x - b||^2 / 2``; the minimizer is ``soft(b, weight)``."""
    b = np.asarray(b, dtype=np.float64)
    n = b.size
    ell = prox.quadratic_data(linop.identity(n), b, lipschitz=1.0)
    return MinimizationProblem([composite_term(prox.l1(n, weight), linop.identity(n),
                                               L_norm=1.0)], ell=ell)


def box_least_squares(d, y, lo: float = 0.0, hi: float = 1.0) -> MinimizationProblem:
    """``min_{x in [lo,hi]^n} ||diag(d) x - y||^2 / 2``, solved by ``clip(y/d, lo, hi)``."""
    d = np.asarray(d, dtype=np.float64)
    n = d.size
    T = linop.matrix(np.diag(d), tag="diag")
    ell = prox.quadratic_data(T, y, lipschitz=float(np.max(np.abs(d))) ** 2)
    # regularizer switched off: weight 0 gives the zero function
    term = composite_term(prox.l1(n, 0.0), linop.identity(n), L_norm=1.0)
    return MinimizationProblem([term], f=prox.box(n, lo, hi), ell=ell)


def box_least_squares_solution(d, y, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    return np.clip(np.asarray(y, dtype=np.float64) / np.asarray(d, dtype=np.float64), lo, hi)


def _spd(rng, n):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Q @ np.diag(rng.uniform(0.5, 2.0, n)) @ Q.T


def _linear_resolvent(S):
    n = S.shape[0]
    return lambda x, gamma: np.linalg.solve(np.eye(n) + gamma * S, x)


@dataclass
class KktInstance:
    problem: CoupledProblem
    x: list[np.ndarray]
    v: list[np.ndarray]


def quadratic_kkt_instance(seed: int = 0, primal_dims=(3, 2), dual_dims=(2, 3, 1),
                           density: float = 0.7) -> KktInstance:
    """Coupled problem with linear SPD ``A_i``, ``B_k``, ``C_i``, built around a known KKT pair.

    Picks ``x_bar`` at random, sets ``v_bar_k = B_k(sum_i L_ki x_bar_i)`` and
    ``z_i = (A_i + C_i) x_bar_i + sum_k L_ki^* v_bar_k``.
    """
    rng = np.random.default_rng(seed)
    m, K = len(primal_dims), len(dual_dims)
    A = [_spd(rng, d) for d in primal_dims]
    Cm = [_spd(rng, d) for d in primal_dims]
    Bm = [_spd(rng, d) for d in dual_dims]
    grid = [[linop.matrix(rng.standard_normal((dual_dims[k], primal_dims[i])), tag=f"L{k}{i}")
             if (rng.random() < density or i == k % m) else None
             for i in range(m)] for k in range(K)]
    xbar = [rng.standard_normal(d) for d in primal_dims]
    vbar = []
    for k in range(K):
        s = sum((linop.apply(Lki, xbar[i]) for i, Lki in enumerate(grid[k]) if Lki is not None),
                np.zeros(dual_dims[k]))
        vbar.append(Bm[k] @ s)
    z = []
    for i in range(m):
        zi = (A[i] + Cm[i]) @ xbar[i]
        for k in range(K):
            if grid[k][i] is not None:
                zi = zi + linop.adjoint(grid[k][i], vbar[k])
        z.append(zi)
    C = [prox.SmoothTerm(d, (lambda x, S=S: S @ x), float(np.linalg.eigvalsh(S).max()))
         for d, S in zip(primal_dims, Cm)]
    problem = CoupledProblem(list(primal_dims), list(dual_dims),
                             B=[_linear_resolvent(S) for S in Bm], L=grid,
                             A=[_linear_resolvent(S) for S in A], C=C, z=z, seed=seed)
    return KktInstance(problem, xbar, vbar)


def summable_injector(scale: float = 1.0, power: float = 2.0, seed: int = 0):
    """Perturbations of norm ``scale/(n+1)^power`` in seeded random directions."""
    rng = np.random.default_rng(seed)

    def inject(n, site, idx, shape):
        e = rng.standard_normal(shape)
        nrm = np.linalg.norm(e)
        return e * (scale / (n + 1) ** power / nrm) if nrm > 0 else e

    return inject
