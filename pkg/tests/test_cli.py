import csv
import json

import numpy as np
import pytest

from finiteband.cli import main

ONE_GAP_CONFIG = {
    "schema": "finiteband/1",
    "bands": [0.0, 1.0, 2.0],
    "m": 1,
    "spec": {"alphas": [0.3]},
    "xgrid": {"points": 17},
    "seed": 0,
}

BORG_CONFIG = {
    "schema": "finiteband/1",
    "bands": [-2.0],
    "m": 2,
    "xgrid": {"points": 9, "xmin": -1.0, "xmax": 1.0},
}


def write_config(tmp_path, cfg, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(tmp_path, command, cfg, extra=None):
    cfgfile = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    argv = [command, "--config", cfgfile, "--out", str(out)] + (extra or [])
    return main(argv), out


def test_construct_outputs(tmp_path):
    code, out = run(tmp_path, "construct", ONE_GAP_CONFIG)
    assert code == 0
    for name in ("potential.csv", "pencils.json", "metadata.json"):
        assert (out / name).exists()
    with open(out / "potential.csv") as fh:
        rows = list(csv.reader(fh))
    # header: x plus four 1x1 matrices in re/im pairs
    assert rows[0][0] == "x"
    assert rows[0][1] == "Q00_re"
    assert len(rows) == 1 + 17
    # the potential is Hermitian scalar: imaginary parts are round-off
    assert all(abs(float(r[2])) < 1e-12 for r in rows[1:])
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["schema"] == "finiteband/1"
    assert "curve" in meta and "period" in meta
    pencils = json.loads((out / "pencils.json").read_text())
    assert pencils["schema"] == "finiteband/1"


def test_construct_deterministic(tmp_path):
    cfg = dict(ONE_GAP_CONFIG)
    cfg["spec"] = {"alphas": [0.3], "U": "random:5"}
    _, out1 = run(tmp_path, "construct", cfg)
    first = (out1 / "potential.csv").read_bytes()
    (out1 / "potential.csv").unlink()
    code, out2 = run(tmp_path, "construct", cfg)
    assert code == 0
    assert (out2 / "potential.csv").read_bytes() == first


def test_verify_passes_one_gap(tmp_path, capsys):
    code, out = run(tmp_path, "verify", ONE_GAP_CONFIG)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pass"]
    names = {e["name"] for e in report["entries"]}
    assert "pencil-identity-ledger" in names
    assert "riccati-residual" in names
    assert "stationary-hierarchy" in names
    assert "pointwise-constraints" in names
    assert "periodic-spectrum-edges" in names
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(report["entries"])
    assert all(line.startswith("PASS") for line in lines)


def test_verify_passes_constant_case(tmp_path):
    code, out = run(tmp_path, "verify", BORG_CONFIG)
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["pass"]
    # no gap-specific entries for the constant case
    names = {e["name"] for e in report["entries"]}
    assert "pointwise-constraints" not in names


def test_verify_perturbed_fails(tmp_path, capsys):
    cfg = dict(ONE_GAP_CONFIG)
    cfg["perturb"] = 1e-2
    code, out = run(tmp_path, "verify", cfg)
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    assert not report["pass"]
    by_name = {e["name"]: e for e in report["entries"]}
    for name in ("pencil-identity-ledger", "riccati-residual",
                 "stationary-hierarchy", "pointwise-constraints"):
        assert not by_name[name]["pass"]
        assert by_name[name]["max_residual"] > 100.0 * by_name[name]["tol"]


def test_sample_outputs(tmp_path):
    code, out = run(tmp_path, "sample", ONE_GAP_CONFIG)
    assert code == 0
    for name in ("green.csv", "density.csv", "xi.csv", "discriminant.csv"):
        assert (out / name).exists()
    with open(out / "density.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["lambda", "rho00_re", "rho00_im"]
    lams = np.array([float(r[0]) for r in rows[1:]])
    rho = np.array([float(r[1]) for r in rows[1:]])
    # density nonnegative on bands, ~0 at the gap midpoint sample
    assert np.all(rho > -1e-8)
    gap_mask = (lams > 1.0) & (lams < 2.0)
    assert np.all(np.abs(rho[gap_mask]) < 1e-6)


def test_sample_discriminant_values(tmp_path):
    code, out = run(tmp_path, "sample", ONE_GAP_CONFIG)
    assert code == 0
    with open(out / "discriminant.csv") as fh:
        rows = list(csv.reader(fh))
    lams = np.array([float(r[0]) for r in rows[1:]])
    ds = np.array([float(r[1]) for r in rows[1:]])
    # |D| > 2 below the spectrum, |D| <= 2 well inside the first band
    assert np.all(np.abs(ds[lams < -0.1]) > 2.0)
    inside = (lams > 0.3) & (lams < 0.7)
    assert np.all(np.abs(ds[inside]) <= 2.0 + 1e-9)


def test_unknown_field_rejected(tmp_path):
    cfg = dict(ONE_GAP_CONFIG)
    cfg["extra"] = 1
    code, _ = run(tmp_path, "verify", cfg)
    assert code == 2


def test_bad_schema_rejected(tmp_path):
    cfg = dict(ONE_GAP_CONFIG)
    cfg["schema"] = "finiteband/0"
    code, _ = run(tmp_path, "construct", cfg)
    assert code == 2


def test_invalid_json_rejected(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code = main(["verify", "--config", str(p), "--out", str(tmp_path / "o")])
    assert code == 2


def test_missing_config_rejected(tmp_path):
    code = main(["verify", "--config", str(tmp_path / "absent.json"),
                 "--out", str(tmp_path / "o")])
    assert code == 2


def test_unknown_tolerance_rejected(tmp_path):
    code, _ = run(tmp_path, "verify", ONE_GAP_CONFIG, extra=["--tol", "bogus=1"])
    assert code == 2


def test_tol_override_forces_failure(tmp_path):
    # an absurdly tight ledger tolerance flips the verdict
    code, out = run(tmp_path, "verify", ONE_GAP_CONFIG,
                    extra=["--tol", "ledger=1e-30"])
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    by_name = {e["name"]: e for e in report["entries"]}
    assert not by_name["pencil-identity-ledger"]["pass"]


def test_spec_alpha_count_mismatch(tmp_path):
    cfg = dict(ONE_GAP_CONFIG)
    cfg["m"] = 2
    code, _ = run(tmp_path, "construct", cfg)
    assert code == 2
