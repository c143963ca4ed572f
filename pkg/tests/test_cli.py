import json
import subprocess
import sys

import numpy as np
import pytest

from parcomp import asset_path, cli, linop, selftest
from parcomp.engine import read_trace_csv
from parcomp.imaging.imageio import read_pgm, write_pgm
from parcomp.restore import RestoreConfig

SHAPES = str(asset_path("shapes64"))
CAMERA = str(asset_path("camera256"))


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def degraded64(tmp_path):
    out = tmp_path / "y.pgm"
    assert run("degrade", "--in", SHAPES, "--out", out, "--psf", "motion:7",
               "--snr", 45, "--seed", 1) == 0
    return out


def test_degrade_sidecar_and_determinism(tmp_path):
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    for out in (a, b):
        assert run("degrade", "--in", CAMERA, "--out", out, "--snr", 45, "--seed", 1) == 0
    assert a.read_bytes() == b.read_bytes()
    side = json.loads(a.with_suffix(".json").read_text())
    assert side["psf"] == "motion:21" and side["seed"] == 1 and side["sigma"] > 0
    assert abs(side["empirical_snr_db"] - 45.0) <= 0.5


def test_missing_input_exits_2(tmp_path, capsys):
    assert run("degrade", "--in", tmp_path / "none.pgm", "--out", tmp_path / "o.pgm") == 2
    assert "no such file" in capsys.readouterr().err
    assert run("metrics", "--ref", tmp_path / "none.pgm", "--est", SHAPES) == 2
    assert run("restore", "--in", tmp_path / "none.pgm", "--out", tmp_path / "o.pgm") == 2


def test_usage_errors_exit_2(tmp_path):
    assert run("degrade", "--in", SHAPES) == 2
    assert run("frobnicate") == 2
    assert run("degrade", "--in", SHAPES, "--out", tmp_path / "o.pgm", "--psf", "gauss") == 2
    assert run("restore", "--in", SHAPES) == 2


def test_metrics_table(tmp_path, capsys, degraded64):
    capsys.readouterr()
    assert run("metrics", "--ref", SHAPES, "--est", SHAPES) == 0
    out = capsys.readouterr().out.split("\n")
    assert out[1].split() == ["PSNR", "inf"] and out[2].split() == ["SSIM", "1.000"]
    assert run("metrics", "--ref", SHAPES, "--est", degraded64) == 0
    psnr = float(capsys.readouterr().out.split("\n")[1].split()[1])
    assert np.isfinite(psnr) and psnr < 30


def test_metrics_size_mismatch(tmp_path):
    small = tmp_path / "s.pgm"
    write_pgm(small, np.zeros((32, 32)))
    assert run("metrics", "--ref", SHAPES, "--est", small) == 2


def test_restore_desk_scale(tmp_path, degraded64):
    out = tmp_path / "x.pgm"
    assert run("restore", "--in", degraded64, "--out", out, "--truth", SHAPES,
               "--psf", "motion:7", "--max-iter", 500) == 0
    m = json.loads(out.with_suffix(".metrics.json").read_text())
    assert m["restored"]["psnr"] >= m["degraded"]["psnr"] + 1.0
    assert m["restored"]["ssim"] > m["degraded"]["ssim"]
    assert m["config"]["alpha"] == m["config"]["beta"] == m["config"]["gamma"] == 1e-2
    trace = read_trace_csv(out.with_suffix(".trace.csv"))
    assert len(trace) == m["iterations"] == 500
    assert read_pgm(out).shape == (64, 64)


def test_restore_reports_convergence(tmp_path, degraded64):
    out = tmp_path / "x.pgm"
    assert run("restore", "--in", degraded64, "--out", out, "--psf", "motion:7",
               "--rtol", 1e-3, "--max-iter", 5000) == 0
    m = json.loads(out.with_suffix(".metrics.json").read_text())
    assert m["status"] == "converged" and m["iterations"] < 5000
    trace = read_trace_csv(out.with_suffix(".trace.csv"))
    assert trace[-1].primal_change < 1e-3 and trace[-1].dual_change < 1e-3
    assert "restored" not in m


def test_flags_override_config_file(tmp_path, degraded64):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 0.5, "beta": 0.25, "max_iter": 7, "psf": "motion:7",
                               "input": str(degraded64), "output": str(tmp_path / "x.pgm")}))
    args = cli.build_parser().parse_args(["restore", "--config", str(cfg), "--alpha", "0.02"])
    c = cli.restore_config(args)
    assert (c.alpha, c.beta, c.max_iter, c.psf) == (0.02, 0.25, 7, "motion:7")
    assert run("restore", "--config", cfg) == 0
    m = json.loads((tmp_path / "x.metrics.json").read_text())
    assert m["iterations"] == 7 and m["config"]["alpha"] == 0.5


def test_bad_config_exits_2(tmp_path, degraded64):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 0.1, "colour": "blue"}))
    assert run("restore", "--config", cfg, "--in", degraded64, "--out", tmp_path / "x.pgm") == 2
    assert run("restore", "--in", degraded64, "--out", tmp_path / "x.pgm", "--gamma", 0) == 2
    assert run("restore", "--config", tmp_path / "missing.json") == 2


def test_config_roundtrip():
    c = RestoreConfig(alpha=0.3, levels=2, wavelet_weights=[1.0, 1.0, 0.5])
    assert RestoreConfig.from_dict(c.to_dict()) == c


def test_selftest_passes(capsys):
    assert run("selftest") == 0
    out = capsys.readouterr().out
    assert "max lemma discrepancy" in out and "all checks passed" in out
    worst = float(out.split("max lemma discrepancy ")[1].split()[0])
    assert worst <= 1e-8


def test_selftest_names_corrupted_operator(monkeypatch, capsys):
    good = selftest.default_maps(16)
    tv = good["TV"]
    broken = linop.LinearMap(tv.in_dim, tv.out_dim, tv.forward,
                             lambda u: 1.01 * tv.adjoint(u), tag="TV")
    monkeypatch.setattr(selftest, "default_maps", lambda: {**good, "TV": broken})
    assert run("selftest") == 1
    out = capsys.readouterr().out
    assert "[FAIL] adjoint suite" in out and "adjoint mismatch for operator TV" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "parcomp", "metrics", "--ref", SHAPES,
                          "--est", SHAPES], capture_output=True, text=True)
    assert res.returncode == 0 and "inf" in res.stdout
