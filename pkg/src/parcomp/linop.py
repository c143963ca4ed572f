"""Matrix-free linear maps between Euclidean spaces.

Every operator in the package (differences, blur, wavelet analysis, the
coupling blocks of the primal-dual engine) is a :class:`LinearMap`: a pair
of pure callables ``forward`` / ``adjoint`` plus the dimensions they act
between.  Vectors are flat ``float64`` arrays.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

Vector = np.ndarray

DEFAULT_NORM_TOL = 1e-6
DEFAULT_NORM_MAX_ITER = 1000
NORM_SAFETY = 1.01


@dataclass(frozen=True)
class LinearMap:
    """A linear operator ``R^in_dim -> R^out_dim`` with its adjoint."""

    in_dim: int
    out_dim: int
    forward: Callable[[Vector], Vector]
    adjoint: Callable[[Vector], Vector]
    tag: str = "linear map"

    def __call__(self, x: Vector) -> Vector:
        return apply(self, x)

    @property
    def T(self) -> "LinearMap":
        return LinearMap(self.out_dim, self.in_dim, self.adjoint, self.forward,
                         tag=f"{self.tag}^*")

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        return compose(self, other)

    def __mul__(self, alpha: float) -> "LinearMap":
        return scale(self, alpha)

    __rmul__ = __mul__

    def __neg__(self) -> "LinearMap":
        return scale(self, -1.0, tag=f"-{self.tag}")

    def renamed(self, tag: str) -> "LinearMap":
        return dataclasses.replace(self, tag=tag)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    upper_bound: float
    iterations: int
    converged: bool


def _as_vector(x, dim: int, tag: str, what: str) -> Vector:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != dim:
        raise ValueError(
            f"{tag}: {what} expects a vector of length {dim}, got shape {x.shape}")
    return x


def apply(L: LinearMap, x) -> Vector:
    """Forward action ``L x``."""
    x = _as_vector(x, L.in_dim, L.tag, "forward")
    return np.asarray(L.forward(x), dtype=np.float64)


def adjoint(L: LinearMap, u) -> Vector:
    """Adjoint action ``L^* u``."""
    u = _as_vector(u, L.out_dim, L.tag, "adjoint")
    return np.asarray(L.adjoint(u), dtype=np.float64)


# -- constructors -----------------------------------------------------------

def identity(dim: int) -> LinearMap:
    return LinearMap(dim, dim, lambda x: x.copy(), lambda u: u.copy(), tag="Id")


def zero(in_dim: int, out_dim: int | None = None) -> LinearMap:
    out_dim = in_dim if out_dim is None else out_dim
    return LinearMap(in_dim, out_dim,
                     lambda x: np.zeros(out_dim), lambda u: np.zeros(in_dim),
                     tag="0")


def matrix(M, tag: str = "matrix") -> LinearMap:
    """Wrap a dense matrix; used for small test instances only."""
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError("matrix map needs a 2-D array")
    M.setflags(write=False)
    return LinearMap(M.shape[1], M.shape[0], lambda x: M @ x, lambda u: M.T @ u,
                     tag=tag)


def scale(L: LinearMap, alpha: float, tag: str | None = None) -> LinearMap:
    alpha = float(alpha)
    return LinearMap(L.in_dim, L.out_dim,
                     lambda x: alpha * L.forward(x),
                     lambda u: alpha * L.adjoint(u),
                     tag=tag or f"{alpha:g}*{L.tag}")


def compose(outer: LinearMap, inner: LinearMap) -> LinearMap:
    """``outer o inner``."""
    if inner.out_dim != outer.in_dim:
        raise ValueError(
            f"cannot compose {outer.tag} (in {outer.in_dim}) with "
            f"{inner.tag} (out {inner.out_dim})")
    return LinearMap(inner.in_dim, outer.out_dim,
                     lambda x: outer.forward(inner.forward(x)),
                     lambda u: inner.adjoint(outer.adjoint(u)),
                     tag=f"{outer.tag}@{inner.tag}")


def vstack(maps: Sequence[LinearMap], tag: str | None = None) -> LinearMap:
    """Row stack ``x -> (L_1 x, ..., L_p x)``; the adjoint sums the blocks."""
    maps = list(maps)
    if not maps:
        raise ValueError("vstack needs at least one map")
    n = maps[0].in_dim
    if any(L.in_dim != n for L in maps):
        raise ValueError("vstack: all maps must share the domain dimension")
    splits = np.cumsum([L.out_dim for L in maps])[:-1]

    def fwd(x):
        return np.concatenate([L.forward(x) for L in maps])

    def adj(u):
        out = np.zeros(n)
        for L, part in zip(maps, np.split(u, splits)):
            out += L.adjoint(part)
        return out

    return LinearMap(n, int(sum(L.out_dim for L in maps)), fwd, adj,
                     tag=tag or "[" + "; ".join(L.tag for L in maps) + "]")


def block(grid: Sequence[Sequence[LinearMap | None]], in_dims: Sequence[int],
          out_dims: Sequence[int], tag: str = "block") -> LinearMap:
    """Block operator from a ``K x m`` grid; ``None`` entries are zero blocks."""
    in_splits = np.cumsum(in_dims)[:-1]
    out_splits = np.cumsum(out_dims)[:-1]

    def fwd(x):
        xs = np.split(x, in_splits)
        out = [np.zeros(d) for d in out_dims]
        for k, row in enumerate(grid):
            for i, L in enumerate(row):
                if L is not None:
                    out[k] += L.forward(xs[i])
        return np.concatenate(out) if out else np.zeros(0)

    def adj(u):
        us = np.split(u, out_splits)
        out = [np.zeros(d) for d in in_dims]
        for k, row in enumerate(grid):
            for i, L in enumerate(row):
                if L is not None:
                    out[i] += L.adjoint(us[k])
        return np.concatenate(out)

    return LinearMap(int(sum(in_dims)), int(sum(out_dims)), fwd, adj, tag=tag)


def to_dense(L: LinearMap) -> np.ndarray:
    """Materialize ``L`` column by column (oracle use only)."""
    cols = []
    e = np.zeros(L.in_dim)
    for j in range(L.in_dim):
        e[j] = 1.0
        cols.append(apply(L, e))
        e[j] = 0.0
    return np.stack(cols, axis=1) if cols else np.zeros((L.out_dim, 0))


# -- norm estimation --------------------------------------------------------

def estimate_norm(L: LinearMap, tol: float = DEFAULT_NORM_TOL,
                  max_iter: int = DEFAULT_NORM_MAX_ITER,
                  seed: int = 0) -> NormEstimate:
    """Estimate ``||L||`` by power iteration on ``L^* L``.

    The returned ``upper_bound`` is the estimate inflated by 1% so that step
    sizes derived from it remain admissible despite estimation error.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("estimate_norm needs tol > 0 and max_iter >= 1")
    if L.in_dim == 0:
        raise ValueError(f"{L.tag}: cannot estimate the norm of a map on R^0")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(L.in_dim)
    x /= np.linalg.norm(x)
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = adjoint(L, apply(L, x))
        lam_new = float(np.dot(x, y))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return NormEstimate(0.0, 0.0, it, True)
        x = y / ny
        if abs(lam_new - lam) <= tol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    else:
        val = np.sqrt(max(lam, 0.0))
        return NormEstimate(val, val * NORM_SAFETY, max_iter, False)
    val = float(np.sqrt(max(lam, 0.0)))
    return NormEstimate(val, val * NORM_SAFETY, it, True)


def adjoint_mismatch(L: LinearMap, n_probes: int = 10, seed: int = 0) -> float:
    """Worst relative gap ``|<Lx,u> - <x,L^*u>|`` over random probe pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        x = rng.standard_normal(L.in_dim)
        u = rng.standard_normal(L.out_dim)
        Lx = apply(L, x)
        Lsu = adjoint(L, u)
        lhs = float(np.dot(Lx, u))
        rhs = float(np.dot(x, Lsu))
        scale_ = max(np.linalg.norm(Lx) * np.linalg.norm(u),
                     np.linalg.norm(x) * np.linalg.norm(Lsu), 1e-300)
        worst = max(worst, abs(lhs - rhs) / scale_)
    return worst
