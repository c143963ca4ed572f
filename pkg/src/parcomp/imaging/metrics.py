"""Image quality figures: PSNR and SSIM."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(reference, estimate):
    ref = np.asarray(reference, dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    if ref.shape != est.shape:
        raise ValueError(f"image size mismatch: {ref.shape} vs {est.shape}")
    return ref, est


def psnr(reference, estimate) -> float:
    """``10 log10(N max(ref^2) / sum((ref - est)^2))`` in dB; ``inf`` when identical."""
    ref, est = _pair(reference, estimate)
    err = float(np.sum((ref - est) ** 2))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(ref.size * float(np.max(ref ** 2)) / err)


def ssim(reference, estimate, data_range: float = 1.0) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5).

    Local statistics use population (biased) moments; the mean is taken over
    windows that fit entirely inside the image.
    """
    ref, est = _pair(reference, estimate)
    if ref.ndim != 2 or min(ref.shape) < SSIM_WINDOW:
        raise ValueError(f"SSIM needs a 2-D image with sides >= {SSIM_WINDOW}")
    radius = SSIM_WINDOW // 2
    truncate = radius / SSIM_SIGMA

    def blur(a):
        return ndimage.gaussian_filter(a, SSIM_SIGMA, truncate=truncate, mode="reflect")

    mx, my = blur(ref), blur(est)
    vx = blur(ref * ref) - mx * mx
    vy = blur(est * est) - my * my
    cxy = blur(ref * est) - mx * my
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    S = ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
    return float(S[radius:-radius, radius:-radius].mean())


def format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f}"


def report_value(value: float):
    """JSON-safe encoding: infinities become the string ``"inf"``."""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value
