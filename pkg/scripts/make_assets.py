"""Regenerate the bundled test images in src/parcomp/data/."""

from pathlib import Path

import numpy as np
from skimage import data

from parcomp.imaging.imageio import write_pgm

OUT = Path(__file__).resolve().parents[1] / "src" / "parcomp" / "data"


def shapes(n=64):
    i, j = np.mgrid[0:n, 0:n] / n
    X = np.full((n, n), 0.15)
    X[(i > 0.15) & (i < 0.55) & (j > 0.1) & (j < 0.45)] = 0.85
    X[(i - 0.65) ** 2 + (j - 0.65) ** 2 < 0.22 ** 2] = 0.55
    X[(i > 0.7) & (j < 0.35) & (i - 0.7 > 0.35 - j - 0.3)] = 1.0
    X[(i > 0.1) & (i < 0.3) & (j > 0.6) & (j < 0.9)] = 0.35
    return X


def natural(n=256):
    cam = data.camera().astype(np.float64)
    f = cam.shape[0] // n
    small = cam.reshape(n, f, n, f).mean(axis=(1, 3))
    return np.round(small).astype(np.uint8)


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    write_pgm(OUT / "shapes64.pgm", shapes())
    write_pgm(OUT / "camera256.pgm", natural())
    print("wrote", sorted(p.name for p in OUT.glob("*.pgm")))
