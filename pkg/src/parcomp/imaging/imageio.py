"""Binary PGM (P5, 8-bit) and grayscale PFM reading and writing."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\s+)*(\d+)\s+(?:#[^\n]*\s+)*(\d+)\s+"
                         rb"(?:#[^\n]*\s+)*(\d+)\s")


class ImageFormatError(ValueError):
    pass


def read_pgm_bytes(path) -> np.ndarray:
    """Raw ``uint8`` pixels of a P5 file, shape ``(height, width)``."""
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if not m:
        raise ImageFormatError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ImageFormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    body = data[m.end():m.end() + width * height]
    if len(body) != width * height:
        raise ImageFormatError(f"{path}: truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def read_pgm(path) -> np.ndarray:
    """Pixels mapped linearly to ``[0, 1]``."""
    return read_pgm_bytes(path).astype(np.float64) / 255.0


def to_uint8(X) -> np.ndarray:
    return np.round(np.clip(np.asarray(X, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def write_pgm(path, X) -> None:
    """Write ``[0, 1]`` data (clipped, rounded) or raw ``uint8`` pixels."""
    X = np.asarray(X)
    pix = X if X.dtype == np.uint8 else to_uint8(X)
    if pix.ndim != 2:
        raise ImageFormatError("PGM images must be 2-D")
    h, w = pix.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + pix.tobytes())


def write_pfm(path, X) -> None:
    """Single-channel little-endian PFM; rows are stored bottom to top."""
    X = np.asarray(X, dtype="<f4")
    if X.ndim != 2:
        raise ImageFormatError("PFM images must be 2-D")
    h, w = X.shape
    header = b"Pf\n%d %d\n-1.0\n" % (w, h)
    Path(path).write_bytes(header + np.ascontiguousarray(X[::-1]).tobytes())


def read_pfm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0].strip() != b"Pf":
        raise ImageFormatError(f"{path}: not a grayscale PFM file")
    w, h = (int(t) for t in parts[1].split())
    scale = float(parts[2])
    dtype = "<f4" if scale < 0 else ">f4"
    X = np.frombuffer(parts[3][:4 * w * h], dtype=dtype)
    if X.size != w * h:
        raise ImageFormatError(f"{path}: truncated pixel data")
    return X.reshape(h, w)[::-1].astype(np.float32)
