import csv
import json
import shutil
import subprocess
import sys

import pytest

from layerineq.cli import main
from layerineq.config import ConfigError, expand_fields, resolve

SPHERES = {"domain": {"inner": {"kind": "sphere", "r0": 1.0}, "outer": {"kind": "sphere", "r0": 1.4}}}
FAST = {"extrema": [32, 64], "volume": [8, 12, 24], "surface": [12, 24]}


def write(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def run(tmp_path, command, cfg, *extra):
    out = tmp_path / f"{command}.out.json"
    code = main([command, "--config", str(write(tmp_path, cfg)), "--out", str(out), *extra])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_geometry_spheres(tmp_path):
    code, rep = run(tmp_path, "geometry", SPHERES)
    assert code == 0
    assert rep["schema_version"] == 1 and rep["command"] == "geometry"
    assert rep["result"]["admissible"] is True
    assert rep["result"]["C2"] == pytest.approx(0.2, abs=1e-10)
    assert rep["config"]["resolution"]["extrema"] == [128, 256]


def test_geometry_inadmissible(tmp_path):
    cfg = {"domain": {"inner": {"kind": "sphere", "r0": 1.0}, "outer": {"kind": "sphere", "r0": 1.5}}}
    code, rep = run(tmp_path, "geometry", cfg)
    assert code == 2 and rep["result"]["admissible"] is False and rep["passed"] is False


@pytest.mark.parametrize(
    "cfg",
    [
        {**SPHERES, "bogus": 1},
        {"domain": {"inner": {"kind": "sphere", "r0": 1.0, "color": "red"}, "outer": {"kind": "sphere", "r0": 1.4}}},
        {"domain": {"inner": {"kind": "sphere", "r0": 1.0}}},
        {**SPHERES, "resolution": {"volume": [8, 8]}},
        {"domain": {"inner": {"kind": "sphere", "r0": 1.0}, "outer": {"kind": "sphere", "r0": 0.9}}},
        {"domain": {"inner": {"kind": "sphere", "r0": 1.0, "terms": [[1, 0, 0.1]]}, "outer": {"kind": "sphere", "r0": 1.4}}},
        {**SPHERES, "fields": [{"kind": "random", "degree": 7}]},
    ],
    ids=["top-key", "nested-key", "missing", "bad-res", "crossing", "sphere-terms", "degree"],
)
def test_malformed_config_exit_1(tmp_path, cfg, capsys):
    command = "verify" if "fields" in cfg else "geometry"
    code, rep = run(tmp_path, command, cfg)
    assert code == 1 and rep is None
    assert "error" in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["geometry", "--config", str(bad)]) == 1
    assert main(["geometry", "--config", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "list.json").write_text("[]")
    assert main(["geometry", "--config", str(tmp_path / "list.json")]) == 1


def test_verify_default_suite(tmp_path):
    code, rep = run(tmp_path, "verify", SPHERES)
    assert code == 0
    fields = rep["result"]["fields"]
    assert len(fields) == 21
    assert all(r["applicable"] and r["passed"] for f in fields for r in f["records"])


def test_verify_non_bc_field_gated(tmp_path):
    cfg = {**SPHERES, "resolution": FAST, "fields": [{"kind": "random", "seed": 1}, {"kind": "random_blend", "seed": 2}]}
    code, rep = run(tmp_path, "verify", cfg)
    assert code == 0
    first, second = rep["result"]["fields"]
    assert all(not r["applicable"] for r in first["records"])
    assert all(r["applicable"] and r["passed"] for r in second["records"])


def test_verify_zero_only(tmp_path):
    code, rep = run(tmp_path, "verify", {**SPHERES, "resolution": FAST, "fields": [{"kind": "zero"}]})
    assert code == 0
    assert all(r["ratio"] == 0.0 and r["passed"] for r in rep["result"]["fields"][0]["records"])


def test_identity_command(tmp_path):
    cfg = {**SPHERES, "fields": [{"kind": "random_suite", "count": 3}, {"kind": "constant", "value": [0, 0, 1]}]}
    code, rep = run(tmp_path, "identity", cfg)
    assert code == 0
    table = rep["result"]["fields"]
    assert len(table) == 4
    assert all(t["residual"] < 1e-6 for t in table)


def test_identity_coarse_drops(tmp_path):
    cfg = {**SPHERES, "resolution": {"volume": [2, 3, 6], "surface": [3, 6]}, "fields": [{"kind": "random", "seed": 4}]}
    code, rep = run(tmp_path, "identity", cfg)
    t = rep["result"]["fields"][0]
    # drops by far more than 10x, but the coarse residual exceeds the default 1e-6 threshold
    assert t["residual_doubled"] <= t["residual"] / 10
    assert t["residual"] > 1e-6 and code == 2
    code, rep = run(tmp_path, "identity", {**cfg, "thresholds": {"identity_residual": 1e-2}})
    assert code == 0


def test_sharpness_command(tmp_path):
    code, rep = run(tmp_path, "sharpness", {**SPHERES, "sharpness": {"n_max": 6}})
    assert code == 0
    sweep = rep["result"]["sweep"]
    assert len(sweep["rows"]) == 6 and sweep["monotone_max"] and sweep["monotone_min"]


def test_sharpness_radial_on_perturbed_is_error(tmp_path):
    cfg = {
        "domain": {"inner": {"kind": "sphere", "r0": 1.0}, "outer": {"kind": "harmonic", "r0": 1.3, "terms": [[1, 1, 0.02]]}},
        "resolution": FAST,
    }
    code, _ = run(tmp_path, "sharpness", cfg)
    assert code == 1
    code, rep = run(tmp_path, "sharpness", {**cfg, "sharpness": {"basis": "blend", "n_max": 2}})
    assert code == 0 and rep["result"]["basis"] == "blend"


def test_convergence_command(tmp_path):
    code, rep = run(tmp_path, "convergence", {**SPHERES, "convergence": {"levels": 3, "max_fields": 1}})
    assert code == 0
    q = {t["quantity"]: t for t in rep["result"]["quantities"]}
    assert all(c < 1e-10 for c in q["volume"]["changes"])
    assert q["volume"]["values"][-1] == pytest.approx(4 * 3.141592653589793 / 3 * (1.4**3 - 1), rel=1e-13)


def test_byte_identical_reports(tmp_path):
    cfg = {**SPHERES, "resolution": FAST, "fields": [{"kind": "random_blend_suite", "count": 2}]}
    p = write(tmp_path, cfg)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "--config", str(p), "--out", str(a)]) == 0
    assert main(["verify", "--config", str(p), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_override_and_csv(tmp_path):
    cfg = {**SPHERES, "resolution": FAST, "fields": [{"kind": "random_blend_suite", "count": 2}]}
    out, table = tmp_path / "o.json", tmp_path / "t.csv"
    assert main(["verify", "--config", str(write(tmp_path, cfg)), "--seed", "7", "--out", str(out), "--csv", str(table)]) == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["seed"] == 7
    assert [f["spec"]["seed"] for f in rep["result"]["fields"]] == [7, 8]
    rows = list(csv.reader(table.open()))
    assert rows[0][:2] == ["field", "record"] and len(rows) == 1 + 2 * 4


def test_config_defaults_and_expansion():
    cfg = resolve(SPHERES)
    assert cfg["thresholds"]["rtol"] == 1e-9 and cfg["seed"] == 0
    specs = expand_fields(cfg, "verify")
    assert specs[0]["kind"] == "radial" and len(specs) == 21
    assert len(expand_fields(cfg, "identity")) == 20
    with pytest.raises(ConfigError):
        resolve({**SPHERES, "thresholds": {"unknown": 1}})


@pytest.mark.skipif(shutil.which("layer-ineq") is None, reason="console script not installed")
def test_console_script(tmp_path):
    p = write(tmp_path, SPHERES)
    proc = subprocess.run(["layer-ineq", "geometry", "--config", str(p)], capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "layerineq.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_identity_blend_fields(tmp_path):
    cfg = {
        "domain": {"inner": {"kind": "sphere", "r0": 1.0}, "outer": {"kind": "harmonic", "r0": 1.3, "terms": [[1, 1, 0.02]]}},
        "fields": [{"kind": "random_blend_suite", "count": 2}],
    }
    code, rep = run(tmp_path, "identity", cfg)
    assert code == 0
    assert all(t["jacobian"] == "finite_difference(0.001, richardson)" for t in rep["result"]["fields"])
