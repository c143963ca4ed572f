"""Image-domain linear operators and the blur + noise degradation model.

Images are ``(height, width)`` arrays, vectorized column by column, so pixel
``(i, j)`` (row ``i``, column ``j``) sits at index ``j*height + i``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ..linop import LinearMap, apply

SQRT2 = math.sqrt(2.0)
NOISELESS_SNR_DB = 300.0


def vec(X) -> np.ndarray:
    return np.asarray(X, dtype=np.float64).reshape(-1, order="F")


def unvec(x, height: int, width: int) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).reshape((height, width), order="F")


# -- first-order differences -------------------------------------------------
# forward differences with a zero last column (row); the "tilde" variants are
# the negated transposes and carry the second-order boundary rules.

def diff_h(X):
    Z = np.zeros_like(X)
    Z[:, :-1] = X[:, 1:] - X[:, :-1]
    return Z


def diff_h_T(U):
    Z = np.zeros_like(U)
    Z[:, 0] = -U[:, 0]
    Z[:, 1:-1] = U[:, :-2] - U[:, 1:-1]
    Z[:, -1] = U[:, -2]
    return Z


def diff_v(X):
    return diff_h(X.T).T


def diff_v_T(U):
    return diff_h_T(U.T).T


def diff_h_tilde(X):
    return -diff_h_T(X)


def diff_v_tilde(X):
    return -diff_v_T(X)


def _check_size(width, height, minimum, what):
    if width < minimum or height < minimum:
        raise ValueError(f"{what} needs width, height >= {minimum}, got {width}x{height}")


def tv_map(width: int, height: int) -> LinearMap:
    """``x -> (vec(D_h X), vec(D_v X))``, from ``R^N`` to ``R^2N``."""
    _check_size(width, height, 2, "tv_map")
    h, w = height, width
    N = h * w

    def fwd(x):
        X = unvec(x, h, w)
        return np.concatenate([vec(diff_h(X)), vec(diff_v(X))])

    def adj(u):
        U1, U2 = unvec(u[:N], h, w), unvec(u[N:], h, w)
        return vec(diff_h_T(U1) + diff_v_T(U2))

    return LinearMap(N, 2 * N, fwd, adj, tag="TV")


def d2_map(width: int, height: int) -> LinearMap:
    """Second-order differences ``R^N -> R^3N`` with the mixed term weighted by 1/sqrt(2)."""
    _check_size(width, height, 3, "d2_map")
    h, w = height, width
    N = h * w

    def fwd(x):
        X = unvec(x, h, w)
        Xh, Xv = diff_h(X), diff_v(X)
        return np.concatenate([
            vec(diff_h_tilde(Xh)),
            vec(diff_h_tilde(Xv) + diff_v_tilde(Xh)) / SQRT2,
            vec(diff_v_tilde(Xv)),
        ])

    def adj(u):
        U1, U2, U3 = (unvec(u[k * N:(k + 1) * N], h, w) for k in range(3))
        # transpose of diff_h_tilde is -diff_h
        Th = -diff_h(U1) - diff_v(U2) / SQRT2
        Tv = -diff_h(U2) / SQRT2 - diff_v(U3)
        return vec(diff_h_T(Th) + diff_v_T(Tv))

    return LinearMap(N, 3 * N, fwd, adj, tag="D2")


def group_l12_value(u, channels: int) -> float:
    """``sum_i ||(u_i, u_{i+N}, ...)||`` for ``channels`` stacked blocks."""
    U = np.reshape(u, (channels, -1))
    return float(np.sum(np.sqrt(np.sum(U * U, axis=0))))


# -- blur ----------------------------------------------------------------------

@dataclass(frozen=True)
class Psf:
    kernel: np.ndarray
    spec: str = "custom"

    def __post_init__(self):
        k = np.array(self.kernel, dtype=np.float64)
        if k.ndim == 1:
            k = k[None, :]
        if k.ndim != 2 or k.size == 0:
            raise ValueError("PSF kernel must be a non-empty 1-D or 2-D array")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    @property
    def anchor(self) -> tuple[int, int]:
        kh, kw = self.kernel.shape
        return (kh - 1) // 2, (kw - 1) // 2

    @property
    def normalized(self) -> bool:
        return bool(np.isclose(self.kernel.sum(), 1.0))

    @classmethod
    def motion(cls, length: int, orientation: str = "horizontal") -> "Psf":
        if length < 1:
            raise ValueError("motion blur length must be >= 1")
        taps = np.full(length, 1.0 / length)
        if orientation in ("horizontal", "h"):
            k, o = taps[None, :], "h"
        elif orientation in ("vertical", "v"):
            k, o = taps[:, None], "v"
        else:
            raise ValueError(f"unknown orientation {orientation!r}")
        return cls(k, spec=f"motion:{length}" + (":v" if o == "v" else ""))

    @classmethod
    def identity(cls) -> "Psf":
        return cls(np.ones((1, 1)), spec="identity")

    @classmethod
    def parse(cls, spec: str) -> "Psf":
        """``identity`` or ``motion:LENGTH[:h|:v]``."""
        if spec == "identity":
            return cls.identity()
        m = re.fullmatch(r"motion:(\d+)(?::(h|v|horizontal|vertical))?", spec.strip())
        if not m:
            raise ValueError(f"bad PSF spec {spec!r}; expected motion:LENGTH[:h|:v]")
        return cls.motion(int(m.group(1)), m.group(2) or "horizontal")


def _shift_add(out, src, coef, di, dj):
    """``out[i, j] += coef * src[i - di, j - dj]`` with zeros outside ``src``."""
    h, w = src.shape
    i0, i1 = max(di, 0), min(h + di, h)
    j0, j1 = max(dj, 0), min(w + dj, w)
    if i0 < i1 and j0 < j1:
        out[i0:i1, j0:j1] += coef * src[i0 - di:i1 - di, j0 - dj:j1 - dj]


SHIFT_SUM_MAX_TAPS = 64


def blur_map(psf: Psf, width: int, height: int) -> LinearMap:
    """Same-size convolution with zero padding; the adjoint correlates."""
    k = psf.kernel
    kh, kw = k.shape
    if kh > height or kw > width:
        raise ValueError(f"PSF {kh}x{kw} does not fit in a {height}x{width} image")
    h, w = height, width
    a0, a1 = psf.anchor
    taps = [(k[a, b], a - a0, b - a1) for a in range(kh) for b in range(kw) if k[a, b] != 0]

    if len(taps) <= SHIFT_SUM_MAX_TAPS:
        def fwd(x):
            X, out = unvec(x, h, w), np.zeros((h, w))
            for c, di, dj in taps:
                _shift_add(out, X, c, di, dj)
            return vec(out)

        def adj(u):
            U, out = unvec(u, h, w), np.zeros((h, w))
            for c, di, dj in taps:
                _shift_add(out, U, c, -di, -dj)
            return vec(out)
    else:
        def fwd(x):
            full = signal.convolve2d(unvec(x, h, w), k, mode="full")
            return vec(full[a0:a0 + h, a1:a1 + w])

        def adj(u):
            full = np.zeros((h + kh - 1, w + kw - 1))
            full[a0:a0 + h, a1:a1 + w] = unvec(u, h, w)
            return vec(signal.correlate2d(full, k, mode="valid"))

    return LinearMap(h * w, h * w, fwd, adj, tag=f"blur[{psf.spec}]")


# -- degradation ----------------------------------------------------------------

def noise_sigma(clean_blurred, snr_db: float) -> float:
    """Noise level giving ``20 log10(||Tx|| / ||w||) = snr_db`` in expectation."""
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    if snr_db >= NOISELESS_SNR_DB:
        return 0.0
    b = np.asarray(clean_blurred)
    return float(np.linalg.norm(b) / (math.sqrt(b.size) * 10.0 ** (snr_db / 20.0)))


def degrade(X, psf: Psf, snr_db: float, seed: int) -> tuple[np.ndarray, float]:
    """Return ``(Y, sigma)`` with ``Y = blur(X) + w`` and i.i.d. Gaussian ``w``."""
    X = np.asarray(X, dtype=np.float64)
    h, w = X.shape
    Tx = apply(blur_map(psf, w, h), vec(X))
    sigma = noise_sigma(Tx, snr_db)
    rng = np.random.default_rng(seed)
    noise = sigma * rng.standard_normal(Tx.size) if sigma > 0 else np.zeros(Tx.size)
    return unvec(Tx + noise, h, w), sigma


def empirical_snr(clean_blurred, degraded) -> float:
    b = np.ravel(clean_blurred)
    e = np.ravel(degraded) - b
    ne = np.linalg.norm(e)
    if ne == 0:
        return math.inf
    return float(20.0 * math.log10(np.linalg.norm(b) / ne))
