"""JSON description of minimization problems built from registered pieces.

See ``docs/problem_schema.md`` for the document layout.  A document is
validated and turned into a :class:`~parcomp.parallel_sum.MinimizationProblem`
by :func:`build`; :func:`load` and :func:`dump` handle files.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from . import linop, prox
from .imaging import imageio
from .imaging.ops import Psf, blur_map, d2_map, tv_map, vec
from .imaging.wavelet import wavelet_map
from .parallel_sum import MinimizationProblem, MinTerm, composite_term, unit_normalized

SCHEMA_VERSION = 1


class ProblemFormatError(ValueError):
    pass


def _req(spec: dict, key: str, where: str):
    if key not in spec:
        raise ProblemFormatError(f"{where}: missing key {key!r}")
    return spec[key]


def _vector(value, where: str, base_dir: Path) -> np.ndarray:
    """Inline list, or ``{"path": ...}`` to a PGM/PFM image (vectorized column-major)."""
    if isinstance(value, dict):
        path = base_dir / _req(value, "path", where)
        if path.suffix.lower() == ".pfm":
            return vec(imageio.read_pfm(path).astype(np.float64))
        return vec(imageio.read_pgm(path))
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 1:
        raise ProblemFormatError(f"{where}: expected a flat list of numbers")
    return arr


# -- operator registry ----------------------------------------------------------

class _Ctx:
    def __init__(self, doc: dict, base_dir: Path):
        self.base_dir = base_dir
        shape = doc.get("shape")
        if shape is not None:
            if len(shape) != 2:
                raise ProblemFormatError("shape must be [height, width]")
            self.height, self.width = (int(s) for s in shape)
            self.dim = self.height * self.width
        else:
            self.height = self.width = None
            self.dim = int(_req(doc, "dim", "problem"))
        if self.dim < 1:
            raise ProblemFormatError("problem dimension must be >= 1")

    def image_shape(self, what: str) -> tuple[int, int]:
        if self.height is None:
            raise ProblemFormatError(f"operator {what!r} needs a top-level 'shape'")
        return self.width, self.height


def _op_identity(spec, ctx):
    return linop.identity(ctx.dim)


def _op_scale(spec, ctx):
    return linop.scale(linop.identity(ctx.dim), float(_req(spec, "factor", "scale")))


def _op_matrix(spec, ctx):
    M = np.asarray(_req(spec, "rows", "matrix"), dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != ctx.dim:
        raise ProblemFormatError(f"matrix: expected rows of length {ctx.dim}")
    return linop.matrix(M)


def _op_tv(spec, ctx):
    return tv_map(*ctx.image_shape("tv"))


def _op_d2(spec, ctx):
    return d2_map(*ctx.image_shape("d2"))


def _op_blur(spec, ctx):
    w, h = ctx.image_shape("blur")
    if "psf_path" in spec:
        k = imageio.read_pfm(ctx.base_dir / spec["psf_path"]).astype(np.float64)
        psf = Psf(k, spec=f"file:{spec['psf_path']}")
    else:
        psf = Psf.parse(spec.get("psf", "motion:21"))
    return blur_map(psf, w, h)


def _op_wavelet(spec, ctx):
    w, h = ctx.image_shape("wavelet")
    return wavelet_map(int(spec.get("levels", 1)), w, h, spec.get("weights"))


OPERATORS: dict[str, Callable[[dict, _Ctx], linop.LinearMap]] = {
    "identity": _op_identity,
    "scale": _op_scale,
    "matrix": _op_matrix,
    "tv": _op_tv,
    "d2": _op_d2,
    "blur": _op_blur,
    "wavelet": _op_wavelet,
}


def _operator(spec, ctx: _Ctx) -> linop.LinearMap:
    if isinstance(spec, str):
        spec = {"name": spec}
    name = _req(spec, "name", "operator")
    if name not in OPERATORS:
        raise ProblemFormatError(f"unknown operator {name!r}; known: {sorted(OPERATORS)}")
    return OPERATORS[name](spec, ctx)


# -- function registry ----------------------------------------------------------

def _fn_box(spec, dim, ctx):
    return prox.box(dim, float(spec.get("lo", 0.0)), float(spec.get("hi", 1.0)))


def _fn_l1(spec, dim, ctx):
    return prox.l1(dim, float(spec.get("weight", 1.0)))


def _fn_group_l12(spec, dim, ctx):
    channels = int(_req(spec, "channels", "group_l12"))
    if dim % channels:
        raise ProblemFormatError(f"group_l12: dimension {dim} not divisible by {channels}")
    return prox.group_l12(dim // channels, channels, float(spec.get("weight", 1.0)))


def _fn_zero_indicator(spec, dim, ctx):
    return prox.zero_indicator(dim)


def _fn_zero(spec, dim, ctx):
    return prox.zero_function(dim)


def _fn_singleton(spec, dim, ctx):
    point = _vector(_req(spec, "point", "singleton"), "singleton", ctx.base_dir)
    if point.size != dim:
        raise ProblemFormatError(f"singleton: point has {point.size} entries, expected {dim}")
    return prox.singleton(point)


def _fn_sqdist(spec, dim, ctx):
    center = _vector(_req(spec, "center", "sqdist"), "sqdist", ctx.base_dir)
    if center.size != dim:
        raise ProblemFormatError(f"sqdist: center has {center.size} entries, expected {dim}")
    return prox.squared_distance(center, float(spec.get("weight", 1.0)))


FUNCTIONS: dict[str, Callable[[dict, int, _Ctx], prox.ProxFunction]] = {
    "box": _fn_box,
    "l1": _fn_l1,
    "group_l12": _fn_group_l12,
    "zero_indicator": _fn_zero_indicator,
    "zero": _fn_zero,
    "singleton": _fn_singleton,
    "sqdist": _fn_sqdist,
}


def _function(spec, dim: int, ctx: _Ctx) -> prox.ProxFunction:
    if isinstance(spec, str):
        spec = {"name": spec}
    name = _req(spec, "name", "function")
    if name not in FUNCTIONS:
        raise ProblemFormatError(f"unknown function {name!r}; known: {sorted(FUNCTIONS)}")
    return FUNCTIONS[name](spec, dim, ctx)


def _smooth(spec, ctx: _Ctx) -> prox.SmoothTerm:
    name = _req(spec, "name", "ell")
    if name != "quadratic_data":
        raise ProblemFormatError(f"unknown smooth term {name!r}; known: ['quadratic_data']")
    T = _operator(spec.get("operator", "identity"), ctx)
    y = _vector(_req(spec, "data", "quadratic_data"), "quadratic_data", ctx.base_dir)
    if y.size != T.out_dim:
        raise ProblemFormatError(f"quadratic_data: data has {y.size} entries, "
                                 f"expected {T.out_dim}")
    return prox.quadratic_data(T, y, lipschitz=spec.get("lipschitz"))


# -- documents ------------------------------------------------------------------

def build(doc: dict, base_dir=".") -> MinimizationProblem:
    """Turn a parsed JSON document into a problem (unit-normalized if requested)."""
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem document must be a JSON object")
    version = doc.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ProblemFormatError(f"unsupported schema version {version}")
    ctx = _Ctx(doc, Path(base_dir))
    terms = []
    for k, t in enumerate(_req(doc, "terms", "problem")):
        L = _operator(t.get("L", "identity"), ctx)
        g = _function(_req(t, "g", f"terms[{k}]"), L.out_dim, ctx)
        if "h" not in t and "M" not in t:
            terms.append(composite_term(g, L, L_norm=t.get("L_norm")))
            continue
        M = _operator(t.get("M", "identity"), ctx)
        h = _function(t.get("h", "zero_indicator"), M.out_dim, ctx)
        terms.append(MinTerm(g, L, h, M, L_norm=t.get("L_norm"), M_norm=t.get("M_norm")))
    if not terms:
        raise ProblemFormatError("problem needs at least one term")
    f = _function(doc["f"], ctx.dim, ctx) if doc.get("f") else None
    ell = _smooth(doc["ell"], ctx) if doc.get("ell") else None
    z = _vector(doc["z"], "z", ctx.base_dir) if doc.get("z") is not None else None
    p = MinimizationProblem(terms, f=f, ell=ell, z=z, seed=int(doc.get("seed", 0)))
    return unit_normalized(p) if doc.get("normalize", False) else p


def load(path) -> MinimizationProblem:
    """Read and build a problem file; relative paths inside resolve next to it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}: invalid JSON ({exc})") from exc
    return build(doc, base_dir=path.parent)


def dump(doc: dict, path: Optional[str] = None) -> str:
    """Validate ``doc`` by building it, then serialize it (to ``path`` if given)."""
    build(copy.deepcopy(doc), base_dir=Path(path).parent if path else ".")
    text = json.dumps({"version": SCHEMA_VERSION, **doc}, indent=2, default=_jsonable)
    if path is not None:
        Path(path).write_text(text)
    return text


def _jsonable(obj: Any):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")
