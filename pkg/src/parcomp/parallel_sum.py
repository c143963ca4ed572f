"""Inclusions and minimizations involving parallel sums of composite terms.

Inclusion form::

    z in A x + sum_k ((L_k^* B_k L_k) [] (M_k^* D_k M_k)) x + C x

Minimization form::

    minimize f(x) + sum_k ((g_k o L_k) [] (h_k o M_k))(x) + ell(x) - <x, z>

Both are solved by lifting to the primal blocks ``(x, y_1..y_r)`` and dual
blocks ``(v_1..v_r, w_1..w_r)`` of :class:`~parcomp.engine.CoupledProblem`
and running the generic engine.  The auxiliary ``y_k`` are the splitting
witnesses of the infimal convolutions and are returned with the solution.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linop
from .engine import (CoupledProblem, DegenerateProblem, IterationConfig, Resolvent,
                     SolverState, SolveStats, solve)
from .linop import LinearMap, adjoint, apply, estimate_norm
from .prox import ProxFunction, SmoothTerm, scaled, zero_indicator

Vector = np.ndarray


@dataclass
class ParallelTerm:
    """``(L^* B L) [] (M^* D M)`` given through resolvents of ``B`` and ``D``."""

    B: Resolvent
    D: Resolvent
    L: LinearMap
    M: LinearMap
    L_norm: Optional[float] = None
    M_norm: Optional[float] = None


@dataclass
class ParallelSumProblem:
    z: Vector
    terms: list[ParallelTerm]
    A: Optional[Resolvent] = None
    C: Optional[SmoothTerm] = None
    seed: int = 0

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.float64)
        n = self.z.size
        if not self.terms:
            raise ValueError("at least one parallel-sum term is required")
        if self.C is not None and self.C.dim != n:
            raise ValueError(f"C has dimension {self.C.dim}, expected {n}")
        for k, t in enumerate(self.terms):
            if t.L.in_dim != n or t.M.in_dim != n:
                raise ValueError(f"term {k}: L and M must act on R^{n}")
        _fill_norms(self.terms, self.seed)

    @property
    def dim(self) -> int:
        return self.z.size

    @property
    def r(self) -> int:
        return len(self.terms)

    @property
    def mu(self) -> float:
        return 0.0 if self.C is None else float(self.C.lipschitz)

    def norm_table(self) -> list[tuple[float, float]]:
        return [(t.L_norm, t.M_norm) for t in self.terms]


@dataclass
class MinTerm:
    """``(g o L) [] (h o M)``.

    ``value`` optionally gives the infimal convolution in closed form; when
    absent the term is evaluated through a splitting witness ``y`` as
    ``g(L(x - y)) + h(M y)``, which bounds it from above.
    """

    g: ProxFunction
    L: LinearMap
    h: ProxFunction
    M: LinearMap
    L_norm: Optional[float] = None
    M_norm: Optional[float] = None
    value: Optional[callable] = None

    def witness_value(self, x: Vector, y: Vector) -> float:
        if self.value is not None:
            return float(self.value(x))
        if self.g.value is None or self.h.value is None:
            return float("nan")
        return float(self.g.value(apply(self.L, x - y)) + self.h.value(apply(self.M, y)))


def composite_term(g: ProxFunction, L: LinearMap, L_norm: float | None = None) -> MinTerm:
    """Plain ``g o L``, written as ``(g o L) [] (iota_{0} o Id)``."""
    n = L.in_dim
    value = None if g.value is None else (lambda x: g.value(apply(L, x)))
    return MinTerm(g, L, zero_indicator(n), linop.identity(n), L_norm=L_norm,
                   M_norm=1.0, value=value)


@dataclass
class MinimizationProblem:
    terms: list[MinTerm]
    f: Optional[ProxFunction] = None
    ell: Optional[SmoothTerm] = None
    z: Optional[Vector] = None
    seed: int = 0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("at least one infimal-convolution term is required")
        n = self.terms[0].L.in_dim
        self.z = np.zeros(n) if self.z is None else np.asarray(self.z, dtype=np.float64)
        for k, t in enumerate(self.terms):
            if t.L.in_dim != n or t.M.in_dim != n:
                raise ValueError(f"term {k}: L and M must act on R^{n}")
            if t.g.dim != t.L.out_dim or t.h.dim != t.M.out_dim:
                raise ValueError(f"term {k}: function/operator dimensions disagree")
        if self.f is not None and self.f.dim != n:
            raise ValueError(f"f has dimension {self.f.dim}, expected {n}")
        if self.ell is not None and self.ell.dim != n:
            raise ValueError(f"ell has dimension {self.ell.dim}, expected {n}")
        _fill_norms(self.terms, self.seed)

    @property
    def dim(self) -> int:
        return self.z.size

    @property
    def r(self) -> int:
        return len(self.terms)

    @property
    def mu(self) -> float:
        return 0.0 if self.ell is None else float(self.ell.lipschitz)

    def as_inclusion(self) -> ParallelSumProblem:
        terms = [ParallelTerm(t.g.prox, t.h.prox, t.L, t.M, t.L_norm, t.M_norm)
                 for t in self.terms]
        return ParallelSumProblem(self.z, terms,
                                  A=None if self.f is None else self.f.prox,
                                  C=self.ell, seed=self.seed)

    def objective(self, x: Vector, ys: Sequence[Vector] | None = None) -> float:
        """Primal objective, with infimal convolutions split by the witnesses ``ys``."""
        if ys is None:
            ys = [np.zeros(self.dim)] * self.r
        val = -float(np.dot(x, self.z))
        if self.f is not None:
            if self.f.value is None:
                return float("nan")
            val += self.f.value(x)
        if self.ell is not None:
            if self.ell.value is None:
                return float("nan")
            val += self.ell.value(x)
        for t, y in zip(self.terms, ys):
            val += t.witness_value(x, y)
        return float(val)


def _fill_norms(terms, seed: int) -> None:
    for k, t in enumerate(terms):
        if t.L_norm is None:
            t.L_norm = estimate_norm(t.L, seed=seed + 2 * k).upper_bound
        if t.M_norm is None:
            t.M_norm = estimate_norm(t.M, seed=seed + 2 * k + 1).upper_bound


def coupling_lambda(norms: Sequence[tuple[float, float]]) -> float:
    return float(sum(a * a for a, _ in norms) + max(a * a + b * b for a, b in norms))


def beta_bound(p: ParallelSumProblem | MinimizationProblem) -> float:
    """``mu + sqrt(sum ||L_k||^2 + max_k(||L_k||^2 + ||M_k||^2))``."""
    norms = [(t.L_norm, t.M_norm) for t in p.terms]
    beta = p.mu + float(np.sqrt(coupling_lambda(norms)))
    if not beta > 0:
        raise DegenerateProblem("degenerate problem: beta = 0")
    return beta


def reduce(p: ParallelSumProblem) -> CoupledProblem:
    """Lift to ``m = r + 1`` primal and ``K = 2r`` dual blocks.

    Coupling grid: row ``k`` holds ``L_k`` at column 0 and ``-L_k`` at column
    ``k+1``; row ``r+k`` holds ``M_k`` at column ``k+1``.
    """
    r, n = p.r, p.dim
    grid: list[list[Optional[LinearMap]]] = [[None] * (r + 1) for _ in range(2 * r)]
    for k, t in enumerate(p.terms):
        grid[k][0] = t.L
        grid[k][k + 1] = -t.L
        grid[r + k][k + 1] = t.M
    return CoupledProblem(
        primal_dims=[n] * (r + 1),
        dual_dims=[t.L.out_dim for t in p.terms] + [t.M.out_dim for t in p.terms],
        B=[t.B for t in p.terms] + [t.D for t in p.terms],
        L=grid,
        A=[p.A] + [None] * r,
        C=[p.C] + [None] * r,
        z=[p.z] + [None] * r,
        lam=coupling_lambda(p.norm_table()),
        seed=p.seed,
    )


@dataclass
class PrimalDualSolution:
    x: Vector
    y: list[Vector]
    v: list[Vector]
    w: list[Vector]
    kkt_residual: float
    state: SolverState = field(repr=False)
    stats: SolveStats = field(repr=False)
    objective: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.stats.converged


def kkt_residual(sol_or_blocks, p: ParallelSumProblem) -> float:
    """Resolvent-based distance to the primal-dual optimality system.

    Sum of ``||x - J_A(x + z - sum L_k^* v_k - Cx)||``, ``||L_k^* v_k - M_k^* w_k||``,
    ``||u_k - J_{B_k}(u_k + v_k)||`` with ``u_k = L_k(x - y_k)`` and
    ``||t_k - J_{D_k}(t_k + w_k)||`` with ``t_k = M_k y_k``; zero exactly at
    solutions.
    """
    if isinstance(sol_or_blocks, PrimalDualSolution):
        x, y, v, w = sol_or_blocks.x, sol_or_blocks.y, sol_or_blocks.v, sol_or_blocks.w
    else:
        x, y, v, w = sol_or_blocks
    Ltv = [adjoint(t.L, vk) for t, vk in zip(p.terms, v)]
    res = p.z - sum(Ltv)
    if p.C is not None:
        res = res - p.C.gradient(x)
    arg = x + res
    total = float(np.linalg.norm(x - (arg if p.A is None else p.A(arg, 1.0))))
    for t, lv, yk, vk, wk in zip(p.terms, Ltv, y, v, w):
        total += float(np.linalg.norm(lv - adjoint(t.M, wk)))
        u = apply(t.L, x - yk)
        total += float(np.linalg.norm(u - t.B(u + vk, 1.0)))
        s = apply(t.M, yk)
        total += float(np.linalg.norm(s - t.D(s + wk, 1.0)))
    return total


def _unpack(p: ParallelSumProblem, state: SolverState, stats: SolveStats,
            objective: Optional[float] = None) -> PrimalDualSolution:
    r = p.r
    x, y = state.x[0], list(state.x[1:])
    v, w = list(state.v[:r]), list(state.v[r:])
    return PrimalDualSolution(x, y, v, w, kkt_residual((x, y, v, w), p),
                              state, stats, objective)


def initial_state(p: ParallelSumProblem, x0=None, y0=None, v0=None, w0=None) -> SolverState:
    n = p.dim
    x = [np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)]
    x += [np.zeros(n) if y0 is None else np.array(yk, dtype=np.float64)
          for yk in (y0 or [None] * p.r)]
    v = [np.zeros(t.L.out_dim) if v0 is None else np.array(vk, dtype=np.float64)
         for t, vk in zip(p.terms, v0 or [None] * p.r)]
    v += [np.zeros(t.M.out_dim) if w0 is None else np.array(wk, dtype=np.float64)
          for t, wk in zip(p.terms, w0 or [None] * p.r)]
    return SolverState(x, v)


def solve_inclusion(p: ParallelSumProblem, config: IterationConfig | None = None,
                    init: SolverState | None = None) -> PrimalDualSolution:
    state, stats = solve(reduce(p), config, init)
    return _unpack(p, state, stats)


def solve_min(p: MinimizationProblem, config: IterationConfig | None = None,
              init: SolverState | None = None) -> PrimalDualSolution:
    """Minimize through prox maps; reports the objective at the final prox outputs.

    The objective uses ``p_{1,1}`` (which lies in ``dom f``) and the matching
    auxiliary blocks as infimal-convolution witnesses.
    """
    config = config or IterationConfig()
    if config.objective is None:
        config = dataclasses.replace(
            config, objective=lambda st: p.objective(st.p[0], st.p[1:]))
    inc = p.as_inclusion()
    state, stats = solve(reduce(inc), config, init)
    obj = p.objective(state.p[0], state.p[1:]) if state.p is not None else None
    return _unpack(inc, state, stats, obj)


def unit_normalized(p: MinimizationProblem) -> MinimizationProblem:
    """Rescale every ``L_k``, ``M_k`` to unit norm, compensating inside ``g_k``, ``h_k``.

    ``g(L x) = g~(L~ x)`` with ``L~ = L/rho`` and ``g~ = g(rho .)``.  The dual
    variables of the rescaled problem are ``rho`` times the original ones.
    """
    terms = []
    for t in p.terms:
        rl, rm = t.L_norm, t.M_norm
        L = linop.scale(t.L, 1.0 / rl, tag=f"{t.L.tag}/|.|") if rl > 0 else t.L
        M = linop.scale(t.M, 1.0 / rm, tag=f"{t.M.tag}/|.|") if rm > 0 else t.M
        g = scaled(t.g, rl) if rl > 0 else t.g
        h = scaled(t.h, rm) if rm > 0 else t.h
        terms.append(MinTerm(g, L, h, M, L_norm=1.0 if rl > 0 else 0.0,
                             M_norm=1.0 if rm > 0 else 0.0, value=t.value))
    return MinimizationProblem(terms, f=p.f, ell=p.ell, z=p.z, seed=p.seed)
