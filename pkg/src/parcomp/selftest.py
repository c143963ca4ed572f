"""Built-in property checks, run by ``parcomp selftest``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from . import instances, linop, prox
from .calculus import check_all
from .engine import IterationConfig, SolverState, admissible_range, beta_of, step
from .imaging.ops import Psf, blur_map, d2_map, tv_map
from .imaging.wavelet import wavelet_map
from .parallel_sum import solve_min

ADJOINT_TOL = 1e-10
FIRM_TOL = 1e-10
SUBGRADIENT_TOL = 1e-9
MOREAU_TOL = 1e-12
FIXED_POINT_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    failures: list[str] = field(default_factory=list)


def default_maps(size: int = 32) -> dict[str, linop.LinearMap]:
    return {
        "TV": tv_map(size, size),
        "D2": d2_map(size, size),
        "blur": blur_map(Psf.motion(min(21, size)), size, size),
        "wavelet": wavelet_map(2, size, size),
    }


def catalog(dim: int = 12, seed: int = 0) -> dict[str, prox.ProxFunction]:
    """One instance of every prox builder (plus scaled variants)."""
    rng = np.random.default_rng(seed)
    return {
        "box": prox.box(dim, -0.5, 1.0),
        "l1": prox.l1(dim, 0.7),
        "group_l12": prox.group_l12(dim // 3, 3, 0.8),
        "zero_indicator": prox.zero_indicator(dim),
        "singleton": prox.singleton(rng.standard_normal(dim)),
        "zero": prox.zero_function(dim),
        "sqdist": prox.squared_distance(rng.standard_normal(dim), 1.5),
        "scaled_l1": prox.scaled(prox.l1(dim, 1.0), 2.0),
        "scaled_box": prox.scaled(prox.box(dim, 0.0, 1.0), 2.0),
        "scaled_group_l12": prox.scaled(prox.group_l12(dim // 2, 2, 1.0), 0.5),
    }


def prox_violations(phi: prox.ProxFunction, n_probes: int = 100, seed: int = 0) -> dict[str, float]:
    """Worst violation of firm nonexpansiveness, the subgradient inequality and Moreau's identity.

    Each entry is a nonnegative excess (``0`` means the property held exactly).
    """
    rng = np.random.default_rng(seed)
    worst = {"firm": 0.0, "subgradient": 0.0, "moreau": 0.0}
    for _ in range(n_probes):
        gamma = float(rng.uniform(0.1, 3.0))
        x, y = 2.0 * rng.standard_normal((2, phi.dim))
        px, py = phi.prox(x, gamma), phi.prox(y, gamma)
        d = px - py
        worst["firm"] = max(worst["firm"], float(d @ d - (x - y) @ d))
        if phi.value is not None:
            vp = phi.value(px)
            # one unconstrained probe, one probe inside dom phi
            for u in (rng.standard_normal(phi.dim),
                      phi.prox(rng.standard_normal(phi.dim), gamma)):
                vu = phi.value(u)
                if np.isfinite(vu):
                    gap = vp + (x - px) @ (u - px) / gamma - vu
                    worst["subgradient"] = max(worst["subgradient"],
                                               float(gap) / max(1.0, abs(vu)))
        # prox_{gamma phi}(x) + gamma prox_{phi*/gamma}(x/gamma) = x
        recon = px + gamma * prox.dual_prox_step(x / gamma, 1.0 / gamma, phi)
        worst["moreau"] = max(worst["moreau"],
                              float(np.linalg.norm(recon - x) / max(1.0, np.linalg.norm(x))))
    return worst


def check_lemmas() -> CheckResult:
    reports = check_all()
    worst = max(r.max_discrepancy for r in reports)
    fails = [f"seed {r.seed} dim {r.dim}: {name} {err:.2e}"
             for r in reports for name, err in r.discrepancies.items() if err > r.tol]
    return CheckResult("lemma suite", not fails,
                       f"{len(reports)} instances, max lemma discrepancy {worst:.2e}", fails)


def check_adjoints(maps: Optional[Mapping[str, linop.LinearMap]] = None,
                   n_probes: int = 100) -> CheckResult:
    maps = default_maps() if maps is None else maps
    gaps = {name: linop.adjoint_mismatch(L, n_probes, seed=i)
            for i, (name, L) in enumerate(maps.items())}
    fails = [f"adjoint mismatch for operator {name}: {g:.2e}"
             for name, g in gaps.items() if not g <= ADJOINT_TOL]
    detail = ", ".join(f"{n} {g:.1e}" for n, g in gaps.items())
    return CheckResult("adjoint suite", not fails, detail, fails)


def check_prox(n_probes: int = 100) -> CheckResult:
    fails, worst = [], {"firm": 0.0, "subgradient": 0.0, "moreau": 0.0}
    limits = {"firm": FIRM_TOL, "subgradient": SUBGRADIENT_TOL, "moreau": MOREAU_TOL}
    for i, (name, phi) in enumerate(catalog().items()):
        v = prox_violations(phi, n_probes, seed=i)
        for key, val in v.items():
            worst[key] = max(worst[key], val)
            if val > limits[key]:
                fails.append(f"prox {name}: {key} violated by {val:.2e}")
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    return CheckResult("prox suite", not fails, detail, fails)


def check_lasso(tol: float = 1e-6, max_iter: int = 2000) -> CheckResult:
    p = instances.lasso()
    sol = solve_min(p, IterationConfig(max_iter=max_iter, rtol=1e-12))
    target = instances.soft_threshold(instances.LASSO_B, instances.LASSO_WEIGHT)
    err = float(np.max(np.abs(sol.x - target)))
    ok = err <= tol
    return CheckResult("lasso convergence", ok,
                       f"sup error {err:.2e} after {sol.stats.iterations} iterations",
                       [] if ok else [f"lasso error {err:.2e} > {tol:g}"])


def check_fixed_points(seeds=range(3), n_gammas: int = 5) -> CheckResult:
    worst, fails = 0.0, []
    for seed in seeds:
        inst = instances.quadratic_kkt_instance(seed)
        beta = beta_of(inst.problem)
        eps = 1e-3
        lo, hi = admissible_range(beta, eps)
        for gamma in np.linspace(lo, hi, n_gammas):
            s = step(SolverState([a.copy() for a in inst.x], [b.copy() for b in inst.v]),
                     inst.problem, float(gamma), epsilon=eps)
            gap = max(max(np.max(np.abs(a - b)) for a, b in zip(s.x, inst.x)),
                      max(np.max(np.abs(a - b)) for a, b in zip(s.v, inst.v)))
            worst = max(worst, float(gap))
            if gap > FIXED_POINT_TOL:
                fails.append(f"seed {seed}, gamma {gamma:.4g}: moved by {gap:.2e}")
    return CheckResult("fixed-point invariance", not fails, f"max drift {worst:.2e}", fails)


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "lemmas": check_lemmas,
    "adjoints": check_adjoints,
    "prox": check_prox,
    "lasso": check_lasso,
    "fixed_points": check_fixed_points,
}


def run_all(maps: Optional[Mapping[str, linop.LinearMap]] = None,
            out: Callable[[str], None] = print) -> bool:
    """Run every check, print a report through ``out`` and return overall success."""
    ok = True
    for key, fn in CHECKS.items():
        t0 = time.perf_counter()
        res = check_adjoints(maps) if key == "adjoints" else fn()
        dt = time.perf_counter() - t0
        out(f"[{'PASS' if res.passed else 'FAIL'}] {res.name:<24s} {res.detail}  ({dt:.2f}s)")
        for f in res.failures:
            out(f"    {f}")
        ok &= res.passed
    out("selftest: " + ("all checks passed" if ok else "FAILED"))
    return ok
