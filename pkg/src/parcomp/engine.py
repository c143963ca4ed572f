"""Error-tolerant primal-dual iteration for coupled monotone inclusions.

Solves, for primal blocks ``x_1..x_m`` and dual blocks ``v_1..v_K``::

    z_i in A_i x_i + sum_k L_ki^* B_k(sum_j L_kj x_j) + C_i x_i

with ``A_i``, ``B_k`` given through their resolvents and ``C_i`` single
valued and Lipschitz.  One iteration is a forward-backward-forward sweep:
every resolvent is evaluated once and every coupling block ``L_ki`` and its
adjoint exactly twice.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .linop import LinearMap, adjoint, apply, block, estimate_norm
from .prox import SmoothTerm

Vector = np.ndarray
# (x, gamma) -> J_{gamma A}(x); None stands for the zero operator.
Resolvent = Callable[[Vector, float], Vector]
# (site, block index, shape) -> additive perturbation or None.
Perturbation = Callable[[str, int, tuple], Optional[Vector]]

DEFAULT_EPSILON = 1e-3
DEFAULT_MAX_ITER = 10000
DEFAULT_RTOL = 1e-6
SITES = ("s1", "p1", "s2", "p2", "q2", "q1")
TRACE_COLUMNS = ("n", "gamma", "primal_change", "dual_change", "objective")


class StepSizeError(ValueError):
    pass


class DegenerateProblem(ValueError):
    pass


@dataclass
class CoupledProblem:
    primal_dims: list[int]
    dual_dims: list[int]
    B: list[Resolvent]
    L: list[list[Optional[LinearMap]]]
    A: list[Optional[Resolvent]] = None
    C: list[Optional[SmoothTerm]] = None
    z: list[Optional[Vector]] = None
    lam: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        m, K = len(self.primal_dims), len(self.dual_dims)
        self.A = list(self.A) if self.A is not None else [None] * m
        self.C = list(self.C) if self.C is not None else [None] * m
        self.z = list(self.z) if self.z is not None else [None] * m
        if len(self.A) != m or len(self.C) != m or len(self.z) != m:
            raise ValueError("A, C and z need one entry per primal block")
        if len(self.B) != K or len(self.L) != K:
            raise ValueError("B and L need one entry (row) per dual block")
        for k, row in enumerate(self.L):
            if len(row) != m:
                raise ValueError(f"coupling row {k} has {len(row)} entries, expected {m}")
            for i, Lki in enumerate(row):
                if Lki is not None and (Lki.in_dim != self.primal_dims[i]
                                        or Lki.out_dim != self.dual_dims[k]):
                    raise ValueError(
                        f"L[{k}][{i}] ({Lki.tag}) maps {Lki.in_dim}->{Lki.out_dim}, "
                        f"expected {self.primal_dims[i]}->{self.dual_dims[k]}")
        for i, C in enumerate(self.C):
            if C is not None and C.dim != self.primal_dims[i]:
                raise ValueError(f"C[{i}] has dimension {C.dim}")
        self.z = [None if zi is None else np.asarray(zi, dtype=np.float64)
                  for zi in self.z]
        if self.lam is None:
            self.lam = self.coupling_bound()

    @property
    def m(self) -> int:
        return len(self.primal_dims)

    @property
    def K(self) -> int:
        return len(self.dual_dims)

    def stacked_coupling(self) -> LinearMap:
        return block(self.L, self.primal_dims, self.dual_dims, tag="L")

    def coupling_bound(self) -> float:
        """Certified ``lambda >= ||L||^2`` for the stacked coupling operator."""
        if self.K == 0 or all(Lki is None for row in self.L for Lki in row):
            return 0.0
        return estimate_norm(self.stacked_coupling(), seed=self.seed).upper_bound ** 2

    def mu(self) -> list[float]:
        return [0.0 if C is None else float(C.lipschitz) for C in self.C]


def _raw_beta(problem: CoupledProblem) -> float:
    return float(np.sqrt(problem.lam) + max(problem.mu(), default=0.0))


def beta_of(problem: CoupledProblem) -> float:
    """``sqrt(lambda) + max_i mu_i``; the step-size bound is ``(1 - eps)/beta``."""
    beta = _raw_beta(problem)
    if not beta > 0:
        raise DegenerateProblem("degenerate problem: beta = 0")
    return beta


def admissible_range(beta: float, epsilon: float) -> tuple[float, float]:
    # beta = 0 only for uncoupled problems without smooth part (proximal point)
    if beta == 0:
        if not 0 < epsilon < 1:
            raise StepSizeError(f"epsilon={epsilon} must lie in ]0, 1[")
        return epsilon, float("inf")
    if not 0 < epsilon < 1.0 / (beta + 1.0):
        raise StepSizeError(
            f"epsilon={epsilon} must lie in ]0, 1/(beta+1)[ = ]0, {1 / (beta + 1):.6g}[")
    return epsilon, (1.0 - epsilon) / beta


def check_step_size(gamma: float, beta: float, epsilon: float) -> None:
    lo, hi = admissible_range(beta, epsilon)
    if not lo <= gamma <= hi:
        raise StepSizeError(
            f"step size violates the admissible bound: gamma={gamma!r} not in "
            f"[{lo!r}, {hi!r}] (beta={beta:.6g}, epsilon={epsilon:g})")


@dataclass
class TraceRecord:
    n: int
    gamma: float
    primal_change: float
    dual_change: float
    objective: Optional[float] = None


@dataclass
class SolverState:
    x: list[Vector]
    v: list[Vector]
    n: int = 0
    last_primal_change: float = float("nan")
    last_dual_change: float = float("nan")
    trace: list[TraceRecord] = field(default_factory=list)
    # resolvent outputs p_{1,i} of the last step; they lie in dom A_i
    p: Optional[list[Vector]] = None

    @classmethod
    def zeros(cls, problem: CoupledProblem) -> "SolverState":
        return cls([np.zeros(d) for d in problem.primal_dims],
                   [np.zeros(d) for d in problem.dual_dims])

    def copy(self) -> "SolverState":
        return SolverState([xi.copy() for xi in self.x], [vk.copy() for vk in self.v],
                           self.n, self.last_primal_change, self.last_dual_change,
                           list(self.trace),
                           None if self.p is None else [pi.copy() for pi in self.p])


@dataclass
class IterationConfig:
    """Step-size schedule and stopping rule.

    ``gamma`` may be a constant, a callable ``n -> gamma_n`` or ``None`` for
    the largest admissible constant ``(1 - epsilon)/beta``.  With
    ``error_injector`` set, ``error_injector(n, site, index, shape)`` is added
    at every inexact evaluation site of iteration ``n``.
    """

    epsilon: float = DEFAULT_EPSILON
    gamma: Union[None, float, Callable[[int], float]] = None
    max_iter: int = DEFAULT_MAX_ITER
    rtol: float = DEFAULT_RTOL
    error_injector: Optional[Callable[[int, str, int, tuple], Optional[Vector]]] = None
    objective: Optional[Callable[[SolverState], Optional[float]]] = None
    objective_every: int = 1
    callback: Optional[Callable[[SolverState], None]] = None

    def gamma_at(self, n: int, beta: float) -> float:
        if self.gamma is None:
            return (1.0 - self.epsilon) / beta if beta > 0 else 1.0
        if callable(self.gamma):
            return float(self.gamma(n))
        return float(self.gamma)


def _relative_change(old: Sequence[Vector], new: Sequence[Vector]) -> float:
    if not new:
        return 0.0
    num = np.sqrt(sum(float(np.sum((a - b) ** 2)) for a, b in zip(old, new)))
    den = np.sqrt(sum(float(np.sum(b * b)) for b in new))
    return float(num / max(den, 1.0))


def step(state: SolverState, problem: CoupledProblem, gamma: float, *,
         epsilon: float = DEFAULT_EPSILON, beta: float | None = None,
         errors: Optional[Perturbation] = None) -> SolverState:
    """One iteration of the forward-backward-forward primal-dual sweep."""
    if beta is None:
        beta = _raw_beta(problem)
    check_step_size(gamma, beta, epsilon)
    m, K = problem.m, problem.K
    x, v = state.x, state.v

    def err(site, idx, arr):
        if errors is None:
            return arr
        e = errors(site, idx, arr.shape)
        return arr if e is None else arr + e

    # adjoint products L_ki^* v_k, one sum per primal block
    Ltv = [np.zeros(d) for d in problem.primal_dims]
    for k in range(K):
        for i, Lki in enumerate(problem.L[k]):
            if Lki is not None:
                Ltv[i] += adjoint(Lki, v[k])

    s1, p1 = [], []
    for i in range(m):
        C = problem.C[i]
        g = Ltv[i] if C is None else C.gradient(x[i]) + Ltv[i]
        s = err("s1", i, x[i] - gamma * g)
        arg = s if problem.z[i] is None else s + gamma * problem.z[i]
        A = problem.A[i]
        p = err("p1", i, arg if A is None else np.asarray(A(arg, gamma), dtype=np.float64))
        s1.append(s)
        p1.append(p)

    p2, v_new = [], []
    for k in range(K):
        Lx = np.zeros(problem.dual_dims[k])
        Lp = np.zeros(problem.dual_dims[k])
        for i, Lki in enumerate(problem.L[k]):
            if Lki is not None:
                Lx += apply(Lki, x[i])
                Lp += apply(Lki, p1[i])
        s = err("s2", k, v[k] + gamma * Lx)
        p = err("p2", k, s - gamma * np.asarray(problem.B[k](s / gamma, 1.0 / gamma)))
        q = err("q2", k, p + gamma * Lp)
        p2.append(p)
        v_new.append(v[k] - s + q)

    Ltp = [np.zeros(d) for d in problem.primal_dims]
    for k in range(K):
        for i, Lki in enumerate(problem.L[k]):
            if Lki is not None:
                Ltp[i] += adjoint(Lki, p2[k])

    x_new = []
    for i in range(m):
        C = problem.C[i]
        g = Ltp[i] if C is None else C.gradient(p1[i]) + Ltp[i]
        q = err("q1", i, p1[i] - gamma * g)
        x_new.append(x[i] - s1[i] + q)

    return SolverState(
        x_new, v_new, state.n + 1,
        _relative_change(x, x_new), _relative_change(v, v_new),
        state.trace, p1)


@dataclass
class SolveStats:
    iterations: int
    converged: bool
    wall_time: float
    beta: float
    history: list[TraceRecord]


def solve(problem: CoupledProblem, config: IterationConfig | None = None,
          init: SolverState | None = None) -> tuple[SolverState, SolveStats]:
    """Iterate :func:`step` until the relative change drops below ``rtol``.

    Stops at ``max_iter`` otherwise.  Starts from all-zero blocks unless
    ``init`` is given.
    """
    config = config or IterationConfig()
    beta = _raw_beta(problem)
    admissible_range(beta, config.epsilon)
    state = init.copy() if init is not None else SolverState.zeros(problem)
    state.trace = []
    t0 = time.perf_counter()
    converged = False
    for _ in range(config.max_iter):
        n = state.n
        gamma = config.gamma_at(n, beta)
        errors = None
        if config.error_injector is not None:
            inj = config.error_injector
            errors = (lambda site, idx, shape, n=n: inj(n, site, idx, shape))
        state = step(state, problem, gamma, epsilon=config.epsilon, beta=beta,
                     errors=errors)
        obj = None
        if config.objective is not None and state.n % config.objective_every == 0:
            obj = config.objective(state)
        state.trace.append(TraceRecord(state.n, gamma, state.last_primal_change,
                                       state.last_dual_change, obj))
        if config.callback is not None:
            config.callback(state)
        if max(state.last_primal_change, state.last_dual_change) < config.rtol:
            converged = True
            break
    stats = SolveStats(state.n, converged, time.perf_counter() - t0, beta, state.trace)
    return state, stats


def trace_to_csv(trace: Sequence[TraceRecord], path=None) -> str:
    """CSV with columns ``n, gamma, primal_change, dual_change, objective``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace:
        w.writerow([r.n, repr(r.gamma), repr(r.primal_change), repr(r.dual_change),
                    "" if r.objective is None else repr(r.objective)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def read_trace_csv(path) -> list[TraceRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [TraceRecord(int(r["n"]), float(r["gamma"]), float(r["primal_change"]),
                        float(r["dual_change"]),
                        float(r["objective"]) if r["objective"] else None)
            for r in rows]
