"""Degrade a bundled image, restore it, and report PSNR/SSIM.

Presets:
  desk   64x64 piecewise-constant image, motion:7, 500 iterations
  table  256x256 natural image, motion:21, 1000 iterations

    python scripts/restore_experiment.py table --out results/table
    python scripts/restore_experiment.py table --update-reference

``--update-reference`` stores the achieved metrics in
tests/data/<preset>_reference.json, which the acceptance suite compares
against (+-0.05 dB).
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from parcomp import asset_path, cli

ROOT = Path(__file__).resolve().parents[1]

PRESETS = {
    "desk": {"image": "shapes64", "psf": "motion:7", "max_iter": 500},
    "table": {"image": "camera256", "psf": "motion:21", "max_iter": 1000},
}
SNR_DB = 45.0
SEED = 1


def run_preset(name: str, out_dir: Path, max_iter: int | None = None) -> dict:
    pre = PRESETS[name]
    out_dir.mkdir(parents=True, exist_ok=True)
    truth = asset_path(pre["image"])
    y, x = out_dir / "degraded.pgm", out_dir / "restored.pgm"
    if cli.main(["degrade", "--in", str(truth), "--out", str(y), "--psf", pre["psf"],
                 "--snr", str(SNR_DB), "--seed", str(SEED)]):
        raise SystemExit("degrade failed")
    if cli.main(["restore", "--in", str(y), "--out", str(x), "--truth", str(truth),
                 "--psf", pre["psf"], "--max-iter", str(max_iter or pre["max_iter"]),
                 "--rtol", "0"]):
        raise SystemExit("restore failed")
    return json.loads(x.with_suffix(".metrics.json").read_text())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("preset", choices=sorted(PRESETS))
    ap.add_argument("--out", type=Path)
    ap.add_argument("--max-iter", type=int)
    ap.add_argument("--update-reference", action="store_true")
    args = ap.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        out = args.out or Path(tmp)
        m = run_preset(args.preset, out, args.max_iter)
    d, r = m["degraded"], m["restored"]
    print(f"{'':10s} {'PSNR (dB)':>10s} {'SSIM':>7s}")
    print(f"{'degraded':10s} {d['psnr']:10.2f} {d['ssim']:7.3f}")
    print(f"{'restored':10s} {r['psnr']:10.2f} {r['ssim']:7.3f}")
    print(f"{m['iterations']} iterations, {m['wall_time_s']:.1f} s")
    if args.update_reference:
        ref = ROOT / "tests" / "data" / f"{args.preset}_reference.json"
        ref.write_text(json.dumps({"preset": args.preset, "iterations": m["iterations"],
                                   "degraded": d, "restored": r}, indent=2) + "\n")
        print("wrote", ref)
    return 0


if __name__ == "__main__":
    sys.exit(main())
