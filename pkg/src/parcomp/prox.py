"""Proximity operators, smooth terms and the dual prox step.

Conventions: ``phi.prox(x, gamma)`` returns ``prox_{gamma*phi}(x)``, which
is also the resolvent ``J_{gamma*dphi}(x)``.  Value maps may return
``inf`` for indicator functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .linop import LinearMap, adjoint, apply, estimate_norm

Vector = np.ndarray


@dataclass(frozen=True)
class ProxFunction:
    dim: int
    prox: Callable[[Vector, float], Vector]
    value: Optional[Callable[[Vector], float]] = None
    tag: str = "phi"


@dataclass(frozen=True)
class SmoothTerm:
    """Differentiable convex term with ``lipschitz``-Lipschitz gradient."""

    dim: int
    gradient: Callable[[Vector], Vector]
    lipschitz: float
    value: Optional[Callable[[Vector], float]] = None
    tag: str = "ell"


def _check_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise ValueError(f"prox parameter must be > 0, got {gamma}")


# -- elementary prox maps ----------------------------------------------------

def prox_box(x, lo: float, hi: float) -> Vector:
    """Projection onto the hypercube ``[lo, hi]^n``."""
    if lo > hi:
        raise ValueError(f"empty box: lo={lo} > hi={hi}")
    return np.clip(np.asarray(x, dtype=np.float64), lo, hi)


def prox_l1(x, gamma: float) -> Vector:
    """Componentwise soft-thresholding at level ``gamma``."""
    _check_gamma(gamma)
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - gamma, 0.0)


def prox_group_l12(x, gamma: float) -> np.ndarray:
    """Block soft-threshold of each row of a 2-D array.

    Rows with norm at most ``gamma`` are sent to zero; the others are shrunk
    by ``1 - gamma/||row||``.
    """
    _check_gamma(gamma)
    x = np.asarray(x, dtype=np.float64)
    norms = np.sqrt(np.sum(x * x, axis=1, keepdims=True))
    factor = 1.0 - gamma / np.maximum(norms, gamma)
    return factor * x


def prox_zero_indicator(x, gamma: float = 1.0) -> Vector:
    return np.zeros_like(np.asarray(x, dtype=np.float64))


def prox_scaled(phi: ProxFunction, rho: float, x, gamma: float) -> Vector:
    """prox of ``gamma * phi(rho .)`` evaluated at ``x``."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    x = np.asarray(x, dtype=np.float64)
    return phi.prox(rho * x, gamma * rho * rho) / rho


def dual_prox_step(s, gamma: float, g: ProxFunction) -> Vector:
    """``s - gamma * prox_{g/gamma}(s/gamma)``, i.e. ``prox_{gamma g*}(s)``."""
    _check_gamma(gamma)
    s = np.asarray(s, dtype=np.float64)
    return s - gamma * g.prox(s / gamma, 1.0 / gamma)


def quadratic_data_gradient(T: LinearMap, y, x) -> Vector:
    """Gradient ``T^*(Tx - y)`` of ``x -> ||Tx - y||^2 / 2``."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (T.out_dim,):
        raise ValueError(f"{T.tag}: data of shape {y.shape}, expected ({T.out_dim},)")
    return adjoint(T, apply(T, x) - y)


# -- catalog of ProxFunction builders ----------------------------------------

def _indicator_value(inside: Callable[[Vector], bool]) -> Callable[[Vector], float]:
    return lambda x: 0.0 if inside(x) else np.inf


def box(dim: int, lo: float = 0.0, hi: float = 1.0) -> ProxFunction:
    if lo > hi:
        raise ValueError(f"empty box: lo={lo} > hi={hi}")
    return ProxFunction(
        dim, lambda x, gamma: prox_box(x, lo, hi),
        _indicator_value(lambda x: bool(np.all((x >= lo) & (x <= hi)))),
        tag=f"box[{lo:g},{hi:g}]")


def l1(dim: int, weight: float = 1.0) -> ProxFunction:
    """``weight * ||x||_1``; ``weight = 0`` gives the zero function."""
    if weight < 0:
        raise ValueError("l1 weight must be nonnegative")
    if weight == 0:
        return zero_function(dim)
    return ProxFunction(dim, lambda x, gamma: prox_l1(x, gamma * weight),
                        lambda x: weight * float(np.sum(np.abs(x))),
                        tag=f"{weight:g}*l1")


def group_l12(n_rows: int, n_cols: int, weight: float = 1.0) -> ProxFunction:
    """``weight * sum_i ||X_i.||`` on a vector holding ``n_cols`` stacked channels.

    The vector is laid out channel after channel (length ``n_rows*n_cols``),
    so row ``i`` of the matrix view gathers entry ``i`` of every channel.
    """
    if weight <= 0:
        raise ValueError("group_l12 weight must be > 0")
    dim = n_rows * n_cols

    def as_rows(x):
        return np.reshape(x, (n_cols, n_rows)).T

    def prox(x, gamma):
        return prox_group_l12(as_rows(x), gamma * weight).T.reshape(-1)

    def value(x):
        return weight * float(np.sum(np.sqrt(np.sum(as_rows(x) ** 2, axis=1))))

    return ProxFunction(dim, prox, value, tag=f"{weight:g}*l12[{n_cols}]")


def zero_indicator(dim: int) -> ProxFunction:
    """Indicator of ``{0}``."""
    return ProxFunction(dim, prox_zero_indicator,
                        _indicator_value(lambda x: not np.any(x)), tag="iota{0}")


def singleton(point) -> ProxFunction:
    """Indicator of ``{point}``."""
    point = np.array(point, dtype=np.float64)
    point.setflags(write=False)
    return ProxFunction(point.size, lambda x, gamma: point.copy(),
                        _indicator_value(lambda x: bool(np.array_equal(x, point))),
                        tag="iota{t}")


def zero_function(dim: int) -> ProxFunction:
    return ProxFunction(dim, lambda x, gamma: np.array(x, dtype=np.float64),
                        lambda x: 0.0, tag="0")


def squared_distance(center, weight: float = 1.0) -> ProxFunction:
    """``weight/2 * ||x - center||^2``."""
    center = np.array(center, dtype=np.float64)
    return ProxFunction(
        center.size,
        lambda x, gamma: (x + gamma * weight * center) / (1.0 + gamma * weight),
        lambda x: 0.5 * weight * float(np.sum((x - center) ** 2)),
        tag="sqdist")


def scaled(phi: ProxFunction, rho: float) -> ProxFunction:
    """The function ``x -> phi(rho x)``."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    value = None if phi.value is None else (lambda x: phi.value(rho * x))
    return ProxFunction(phi.dim, lambda x, gamma: prox_scaled(phi, rho, x, gamma),
                        value, tag=f"{phi.tag}({rho:g}.)")


# -- smooth terms ------------------------------------------------------------

def quadratic_data(T: LinearMap, y, lipschitz: float | None = None,
                   seed: int = 0) -> SmoothTerm:
    """``x -> ||Tx - y||^2 / 2`` with gradient Lipschitz constant ``||T||^2``."""
    y = np.array(y, dtype=np.float64)
    if y.shape != (T.out_dim,):
        raise ValueError(f"{T.tag}: data of shape {y.shape}, expected ({T.out_dim},)")
    if lipschitz is None:
        lipschitz = estimate_norm(T, seed=seed).upper_bound ** 2

    def value(x):
        r = apply(T, x) - y
        return 0.5 * float(np.dot(r, r))

    return SmoothTerm(T.in_dim, lambda x: quadratic_data_gradient(T, y, x),
                      float(lipschitz), value, tag=f"0.5||{T.tag}x-y||^2")


def zero_smooth(dim: int) -> SmoothTerm:
    return SmoothTerm(dim, lambda x: np.zeros(dim), 0.0, lambda x: 0.0, tag="0")
