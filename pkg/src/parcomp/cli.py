"""Command-line interface: ``degrade``, ``restore``, ``metrics``, ``selftest``.

Exit codes: 0 success, 1 check or convergence failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, selftest
from .imaging import imageio, metrics
from .imaging.ops import Psf, blur_map, degrade, empirical_snr, vec
from .restore import RestoreConfig, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read_image(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        return imageio.read_pgm(p)
    except imageio.ImageFormatError as exc:
        raise UsageError(str(exc)) from exc


def cmd_degrade(args) -> int:
    X = _read_image(args.inp)
    try:
        psf = Psf.parse(args.psf)
        Y, sigma = degrade(X, psf, args.snr, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    imageio.write_pgm(out, Y)
    h, w = X.shape
    Tx = blur_map(psf, w, h).forward(vec(X))
    side = {
        "sigma": sigma,
        "seed": args.seed,
        "psf": psf.spec,
        "snr_db": args.snr,
        # measured on the floating-point pair, before 8-bit quantization
        "empirical_snr_db": metrics.report_value(empirical_snr(Tx, vec(Y))),
        "input": str(args.inp),
    }
    sidecar = Path(args.sidecar) if args.sidecar else out.with_suffix(".json")
    sidecar.write_text(json.dumps(side, indent=2))
    print(f"wrote {out} (sigma={sigma:.6g}, empirical SNR "
          f"{metrics.format_db(empirical_snr(Tx, vec(Y)))} dB)")
    return EXIT_OK


_RESTORE_FLAGS = {
    "alpha": "alpha", "beta": "beta", "gamma": "gamma", "levels": "levels",
    "max_iter": "max_iter", "rtol": "rtol", "eps": "epsilon", "psf": "psf",
    "seed": "seed", "inp": "input", "out": "output", "truth": "truth",
    "trace": "trace", "metrics_out": "metrics", "intensity_scale": "intensity_scale",
}


def restore_config(args) -> RestoreConfig:
    """Config file (if any) overlaid with every flag given on the command line."""
    base = {}
    if args.config:
        cp = Path(args.config)
        if not cp.is_file():
            raise UsageError(f"no such file: {args.config}")
        try:
            base = json.loads(cp.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from exc
    for flag, key in _RESTORE_FLAGS.items():
        val = getattr(args, flag)
        if val is not None:
            base[key] = val
    try:
        cfg = RestoreConfig.from_dict(base)
        cfg.validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid restore config: {exc}") from exc
    if cfg.input is None or cfg.output is None:
        raise UsageError("restore needs --in and --out (or input/output in --config)")
    return cfg


def cmd_restore(args) -> int:
    cfg = restore_config(args)
    for path in (cfg.input, cfg.truth):
        if path is not None:
            _read_image(path)
    try:
        report = run(cfg)
    except (ValueError, imageio.ImageFormatError) as exc:
        raise UsageError(str(exc)) from exc
    line = f"{report['status']} after {report['iterations']} iterations"
    if "restored" in report:
        d, r = report["degraded"], report["restored"]
        line += (f"; PSNR {d['psnr']:.2f} -> {r['psnr']:.2f} dB,"
                 f" SSIM {d['ssim']:.3f} -> {r['ssim']:.3f}")
    print(line)
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref, est = _read_image(args.ref), _read_image(args.est)
    if ref.shape != est.shape:
        raise UsageError(f"image size mismatch: {ref.shape} vs {est.shape}")
    p, s = metrics.psnr(ref, est), metrics.ssim(ref, est)
    print(f"{'metric':<8s} {'value':>10s}")
    print(f"{'PSNR':<8s} {metrics.format_db(p):>10s}")
    print(f"{'SSIM':<8s} {s:>10.3f}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest.run_all() else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="parcomp", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("degrade", help="blur an image and add Gaussian noise")
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--psf", default="motion:21")
    d.add_argument("--snr", type=float, default=45.0)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--sidecar", help="JSON path (default: OUT with .json suffix)")
    d.set_defaults(func=cmd_degrade)

    r = sub.add_parser("restore", help="restore a degraded image")
    r.add_argument("--in", dest="inp")
    r.add_argument("--out")
    r.add_argument("--truth")
    r.add_argument("--config")
    r.add_argument("--alpha", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--gamma", type=float)
    r.add_argument("--levels", type=int)
    r.add_argument("--max-iter", dest="max_iter", type=int)
    r.add_argument("--rtol", type=float)
    r.add_argument("--eps", type=float)
    r.add_argument("--psf")
    r.add_argument("--seed", type=int)
    r.add_argument("--intensity-scale", dest="intensity_scale", type=float)
    r.add_argument("--trace", help="CSV path (default: OUT with .trace.csv suffix)")
    r.add_argument("--metrics", dest="metrics_out",
                   help="JSON path (default: OUT with .metrics.json suffix)")
    r.set_defaults(func=cmd_restore)

    m = sub.add_parser("metrics", help="PSNR and SSIM of an estimate")
    m.add_argument("--ref", required=True)
    m.add_argument("--est", required=True)
    m.set_defaults(func=cmd_metrics)

    s = sub.add_parser("selftest", help="run the built-in property checks")
    s.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"parcomp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"parcomp: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
