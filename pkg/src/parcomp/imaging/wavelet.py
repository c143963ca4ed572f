"""Separable CDF 9/7 wavelet analysis via lifting.

Whole-sample symmetric extension at the borders.  The analysis map is
biorthogonal, not orthogonal, so its adjoint (used by the solver) and its
inverse (used only to validate the lifting) are implemented separately.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from ..linop import LinearMap
from .ops import unvec, vec

ALPHA = -1.586134342059924
BETA = -0.052980118572961
GAMMA = 0.882911075530934
DELTA = 0.443506852043971
ZETA = 1.149604398860241

_STEPS = ((ALPHA, "predict"), (BETA, "update"), (GAMMA, "predict"), (DELTA, "update"))


# neighbour sums with the boundary mirroring folded in
def _right_pair(s):
    """``s[n] + s[n+1]`` with ``s[m] := s[m-1]``."""
    out = s.copy()
    out[:-1] += s[1:]
    out[-1] += s[-1]
    return out


def _right_pair_T(d):
    out = d.copy()
    out[1:] += d[:-1]
    out[-1] += d[-1]
    return out


def _left_pair(d):
    """``d[n-1] + d[n]`` with ``d[-1] := d[0]``."""
    out = d.copy()
    out[1:] += d[:-1]
    out[0] += d[0]
    return out


def _left_pair_T(s):
    out = s.copy()
    out[:-1] += s[1:]
    out[0] += s[0]
    return out


def _split(X):
    if X.shape[0] % 2:
        raise ValueError(f"lifting needs an even length along the axis, got {X.shape[0]}")
    return X[0::2].copy(), X[1::2].copy()


def _merge(s, d):
    X = np.empty((s.shape[0] + d.shape[0],) + s.shape[1:])
    X[0::2], X[1::2] = s, d
    return X


def analysis_1d(X, axis=0):
    """One level along ``axis``: lowpass half first, highpass half second."""
    X = np.moveaxis(np.asarray(X, dtype=np.float64), axis, 0)
    s, d = _split(X)
    for c, kind in _STEPS:
        if kind == "predict":
            d += c * _right_pair(s)
        else:
            s += c * _left_pair(d)
    return np.moveaxis(np.concatenate([s * ZETA, d / ZETA]), 0, axis)


def analysis_1d_T(C, axis=0):
    C = np.moveaxis(np.asarray(C, dtype=np.float64), axis, 0)
    m = C.shape[0] // 2
    s, d = C[:m] * ZETA, C[m:] / ZETA
    for c, kind in reversed(_STEPS):
        if kind == "predict":
            s = s + c * _right_pair_T(d)
        else:
            d = d + c * _left_pair_T(s)
    return np.moveaxis(_merge(s, d), 0, axis)


def synthesis_1d(C, axis=0):
    """Inverse of :func:`analysis_1d`."""
    C = np.moveaxis(np.asarray(C, dtype=np.float64), axis, 0)
    m = C.shape[0] // 2
    s, d = C[:m] / ZETA, C[m:] * ZETA
    for c, kind in reversed(_STEPS):
        if kind == "predict":
            d = d - c * _right_pair(s)
        else:
            s = s - c * _left_pair(d)
    return np.moveaxis(_merge(s, d), 0, axis)


def default_levels(width: int, height: int, max_levels: int = 4, coarse: int = 8) -> int:
    """Up to ``max_levels`` while the approximation band stays at least ``coarse`` wide."""
    side = min(width, height)
    lv = int(math.floor(math.log2(side / coarse))) if side >= coarse else 0
    return max(1, min(max_levels, lv))


def _check(levels, width, height):
    if levels < 1:
        raise ValueError("need at least one decomposition level")
    f = 2 ** levels
    if width % f or height % f:
        raise ValueError(
            f"{width}x{height} image not divisible by 2^{levels} for {levels} levels")


def analysis_2d(X, levels: int) -> np.ndarray:
    C = np.array(X, dtype=np.float64)
    h, w = C.shape
    for j in range(levels):
        hj, wj = h >> j, w >> j
        sub = analysis_1d(C[:hj, :wj], axis=1)
        C[:hj, :wj] = analysis_1d(sub, axis=0)
    return C


def analysis_2d_T(C, levels: int) -> np.ndarray:
    X = np.array(C, dtype=np.float64)
    h, w = X.shape
    for j in reversed(range(levels)):
        hj, wj = h >> j, w >> j
        sub = analysis_1d_T(X[:hj, :wj], axis=0)
        X[:hj, :wj] = analysis_1d_T(sub, axis=1)
    return X


def synthesis_2d(C, levels: int) -> np.ndarray:
    X = np.array(C, dtype=np.float64)
    h, w = X.shape
    for j in reversed(range(levels)):
        hj, wj = h >> j, w >> j
        sub = synthesis_1d(X[:hj, :wj], axis=0)
        X[:hj, :wj] = synthesis_1d(sub, axis=1)
    return X


def subband_weights(width: int, height: int, levels: int,
                    weights: Optional[Sequence[float]] = None) -> np.ndarray:
    """Per-coefficient weights in the Mallat layout.

    ``weights[j]`` scales the three detail bands of level ``j+1`` (finest
    first) and ``weights[levels]`` the approximation band.
    """
    if weights is None:
        return np.ones((height, width))
    weights = list(weights)
    if len(weights) != levels + 1:
        raise ValueError(f"expected {levels + 1} subband weights, got {len(weights)}")
    Wt = np.empty((height, width))
    for j in range(levels):
        Wt[:height >> j, :width >> j] = weights[j]
    Wt[:height >> levels, :width >> levels] = weights[levels]
    return Wt


def wavelet_map(levels: int, width: int, height: int,
                weights: Optional[Sequence[float]] = None) -> LinearMap:
    """Weighted 9/7 analysis operator ``R^N -> R^N`` (Mallat layout, vectorized)."""
    _check(levels, width, height)
    h, w = height, width
    Wt = subband_weights(width, height, levels, weights)

    def fwd(x):
        return vec(Wt * analysis_2d(unvec(x, h, w), levels))

    def adj(u):
        return vec(analysis_2d_T(Wt * unvec(u, h, w), levels))

    return LinearMap(h * w, h * w, fwd, adj, tag=f"W97[{levels}]")


def wavelet_synthesis(c, levels: int, width: int, height: int) -> np.ndarray:
    """Unweighted synthesis: the inverse (not the adjoint) of the analysis map."""
    _check(levels, width, height)
    return vec(synthesis_2d(unvec(c, height, width), levels))
