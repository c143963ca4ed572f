"""Non-blind deblurring with an infimal-convolution TV / second-order TV prior.

    minimize_x  iota_[lo,hi](x)
              + ((alpha ||.||_12 o TV) [] (beta ||.||_12 o D2))(x)
              + gamma ||W x||_1
              + 1/2 ||T x - y||^2

The wavelet term is carried as ``(g o W) [] (iota_{0} o Id)``.  Every
coupling operator is rescaled to unit norm before solving.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import prox
from .engine import IterationConfig, trace_to_csv
from .imaging import imageio, metrics
from .imaging.ops import Psf, blur_map, d2_map, tv_map, unvec, vec
from .imaging.wavelet import default_levels, wavelet_map
from .linop import estimate_norm
from .parallel_sum import (MinimizationProblem, MinTerm, PrimalDualSolution, beta_bound,
                           composite_term, solve_min, unit_normalized)

DEFAULT_WEIGHT = 1e-2


@dataclass
class RestoreConfig:
    alpha: float = DEFAULT_WEIGHT
    beta: float = DEFAULT_WEIGHT
    gamma: float = DEFAULT_WEIGHT
    # weights are stated for pixel values in [0, intensity_scale]; images are
    # handled in [0, 1], so the effective weights are divided by this factor
    intensity_scale: float = 255.0
    lo: float = 0.0
    hi: float = 1.0
    psf: str = "motion:21"
    levels: Optional[int] = None        # None: default_levels(width, height)
    wavelet_weights: Optional[list[float]] = None
    epsilon: float = 1e-3
    max_iter: int = 500
    rtol: float = 1e-6
    seed: int = 0
    input: Optional[str] = None
    output: Optional[str] = None
    truth: Optional[str] = None
    trace: Optional[str] = None
    metrics: Optional[str] = None
    objective_every: int = 10

    def validate(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if not self.intensity_scale > 0:
            raise ValueError("intensity_scale must be > 0")
        if self.lo > self.hi:
            raise ValueError(f"empty box [{self.lo}, {self.hi}]")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in ]0, 1[")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.rtol < 0:
            raise ValueError("rtol must be >= 0")
        if self.levels is not None and self.levels < 1:
            raise ValueError("levels must be >= 1")
        Psf.parse(self.psf)

    @classmethod
    def from_dict(cls, d: dict) -> "RestoreConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "RestoreConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RestoreResult:
    image: np.ndarray
    solution: PrimalDualSolution
    beta: float
    levels: int
    norms: dict = field(default_factory=dict)


def build_problem(Y: np.ndarray, cfg: RestoreConfig) -> tuple[MinimizationProblem, int, dict]:
    """Restoration problem for the observed image ``Y``, already unit-normalized."""
    h, w = Y.shape
    N = h * w
    levels = cfg.levels if cfg.levels is not None else default_levels(w, h)
    T = blur_map(Psf.parse(cfg.psf), w, h)
    TV, D2 = tv_map(w, h), d2_map(w, h)
    W = wavelet_map(levels, w, h, cfg.wavelet_weights)
    seed = cfg.seed
    a, b, c = (wt / cfg.intensity_scale for wt in (cfg.alpha, cfg.beta, cfg.gamma))
    norms = {op.tag: estimate_norm(op, seed=seed + i).upper_bound
             for i, op in enumerate((T, TV, D2, W))}

    ell = prox.quadratic_data(T, vec(Y), lipschitz=norms[T.tag] ** 2)
    term1 = MinTerm(prox.group_l12(N, 2, a), TV,
                    prox.group_l12(N, 3, b), D2,
                    L_norm=norms[TV.tag], M_norm=norms[D2.tag])
    term2 = composite_term(prox.l1(N, c), W, L_norm=norms[W.tag])
    p = MinimizationProblem([term1, term2], f=prox.box(N, cfg.lo, cfg.hi), ell=ell,
                            seed=seed)
    return unit_normalized(p), levels, norms


def restore(Y: np.ndarray, cfg: RestoreConfig) -> RestoreResult:
    cfg.validate()
    Y = np.asarray(Y, dtype=np.float64)
    p, levels, norms = build_problem(Y, cfg)
    every = max(1, cfg.objective_every)
    config = IterationConfig(
        epsilon=cfg.epsilon, max_iter=cfg.max_iter, rtol=cfg.rtol,
        objective=lambda st: p.objective(st.p[0], st.p[1:]), objective_every=every)
    sol = solve_min(p, config)
    # p_{1,1} is the box projection, so it is the feasible estimate to report
    x = sol.state.p[0] if sol.state.p is not None else sol.x
    return RestoreResult(unvec(x, *Y.shape), sol, beta_bound(p), levels, norms)


def run(cfg: RestoreConfig) -> dict:
    """File-level restoration: reads ``cfg.input`` and writes image, trace and metrics.

    Returns the metrics dictionary that was written.
    """
    if cfg.input is None or cfg.output is None:
        raise ValueError("restore needs both an input and an output path")
    Y = imageio.read_pgm(cfg.input)
    truth = imageio.read_pgm(cfg.truth) if cfg.truth else None
    if truth is not None and truth.shape != Y.shape:
        raise ValueError(f"truth {truth.shape} and input {Y.shape} differ in size")
    res = restore(Y, cfg)
    out = Path(cfg.output)
    imageio.write_pgm(out, res.image)
    trace_path = Path(cfg.trace) if cfg.trace else out.with_suffix(".trace.csv")
    metrics_path = Path(cfg.metrics) if cfg.metrics else out.with_suffix(".metrics.json")
    trace_to_csv(res.solution.stats.history, trace_path)

    stats = res.solution.stats
    report = {
        "status": "converged" if stats.converged else "max_iter",
        "iterations": stats.iterations,
        "wall_time_s": stats.wall_time,
        "beta": res.beta,
        "levels": res.levels,
        "operator_norms": res.norms,
        "objective": res.solution.objective,
        "config": cfg.to_dict(),
    }
    if truth is not None:
        # metrics of the written 8-bit image, so they can be reproduced from files
        est = imageio.read_pgm(out)
        report["degraded"] = {"psnr": metrics.report_value(metrics.psnr(truth, Y)),
                              "ssim": metrics.ssim(truth, Y)}
        report["restored"] = {"psnr": metrics.report_value(metrics.psnr(truth, est)),
                              "ssim": metrics.ssim(truth, est)}
    metrics_path.write_text(json.dumps(report, indent=2))
    return report
