import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from qcharmlab import errors, list_scenarios, run_scenario, validate
from qcharmlab.cli import main
from qcharmlab.scenario import load_scenario

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def identity_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("identity")
    report, code = run_scenario("unit_disk_identity", out)
    return report, code, out


def test_list_scenarios():
    names = list_scenarios()
    assert len(names) >= 4
    for name in ("unit_disk_identity", "rotation", "affine_ellipse_k13", "perturbed_smooth"):
        assert name in names


@pytest.mark.parametrize("name", ["unit_disk_identity", "rotation", "affine_ellipse_k13", "perturbed_smooth"])
def test_validate_bundled(name):
    assert validate(name) == []


def test_identity_alias():
    assert load_scenario("identity")["name"] == "unit_disk_identity"


def test_validate_small_N():
    assert validate(FIXTURES / "bad_n.json") == ["N below minimum 64"]


def test_validate_findings(tmp_path):
    cfg = json.loads((FIXTURES / "bad_n.json").read_text())
    cfg.update(N=1000, name="bad name", grids={"qc": [8, 64], "pairs": 10}, outputs=["movie"], extra=1)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    found = validate(path)
    assert "N must be a power of two" in found
    assert "name must be a nonempty filesystem-safe string" in found
    assert any(f.startswith("grids.qc below minimum") for f in found)
    assert any(f.startswith("grids.pairs below minimum") for f in found)
    assert any("movie" in f for f in found) and any("extra" in f for f in found)


def test_validate_malformed(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(errors.ConfigError):
        validate(path)
    path.write_text("[1, 2]")
    with pytest.raises(errors.ConfigError):
        validate(path)
    with pytest.raises(errors.ConfigError):
        validate(tmp_path / "missing.json")
    with pytest.raises(errors.ConfigError):
        run_scenario(FIXTURES / "bad_n.json")


def test_identity_run(identity_run):
    report, code, out = identity_run
    assert code == 0 and report.passed
    v = report.values
    assert abs(v["boundary_bound"] - 0.048733) < 1e-5
    assert abs(v["empirical_colip"] - 1) < 1e-9
    for name in ("report.json", "timings.json", "summary.txt", "audit.csv", "audit.json",
                 "field.csv", "map.json", "plots/circles.svg", "plots/lap_phi.svg"):
        assert (out / name).is_file(), name
    data = json.loads((out / "report.json").read_text())
    assert data["schema_version"] == 1 and data["exit_code"] == 0
    assert "timings" not in data and all(s["status"] == "ok" for s in data["stages"].values())
    assert (out / "field.csv").read_text().startswith("x,y,d,nu_x,nu_y,kappa_foot")


def test_svg_plots_are_valid(identity_run):
    _, _, out = identity_run
    for name in ("circles.svg", "lap_phi.svg"):
        root = ET.parse(out / "plots" / name).getroot()
        assert root.tag.endswith("svg")
    text = (out / "plots" / "lap_phi.svg").read_text()
    assert "colour scale" in text.split("<circle", 1)[0]


def test_summary_table(identity_run):
    report, _, _ = identity_run
    table = report.summary_table()
    header = next(line for line in table.splitlines() if line.startswith("scenario "))
    assert header.split() == ["scenario", "K", "kappa0", "A", "rho", "M(rho)", "C", "C/K", "emp_colip", "margin"]


def test_affine_run(tmp_path):
    report, code = run_scenario("affine_ellipse_k13", tmp_path)
    assert code == 0
    v = report.values
    assert abs(v["K"] - 2) < 1e-9 and abs(v["kappa0"] - 3) < 1e-3 and abs(v["A"] - 24) < 1e-9


def test_orientation_reversing_config(tmp_path):
    report, code = run_scenario(FIXTURES / "affine_k2.json", tmp_path)
    assert code != 0
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["stages"]["certify"]["error"]["error"] == "OrientationFailure"
    assert abs(data["stages"]["certify"]["min_jacobian"] + 3) < 1e-9
    # the failed run still carries the dilatation picture
    assert data["stages"]["qc"]["status"] == "partial"
    assert data["stages"]["barrier"]["status"] == "skipped"


def test_toml_config(tmp_path):
    report, code = run_scenario(FIXTURES / "identity_small.toml", tmp_path, seed=9)
    assert code == 0 and report.scenario["seed"] == 9
    assert (tmp_path / "audit.csv").exists() and not (tmp_path / "plots").exists()


def test_nested_phase_spec(tmp_path):
    cfg = json.loads((FIXTURES / "bad_n.json").read_text())
    cfg.update(N=256, name="nested", boundary={"type": "correspondence",
                                               "phase": {"kind": "perturbed_uniform", "eps": 0.1, "m": 2}},
               grids={"qc": [32, 256], "barrier": [32, 256], "pairs": 10000}, outputs=[])
    path = tmp_path / "nested.json"
    path.write_text(json.dumps(cfg))
    assert validate(path) == []
    report, code = run_scenario(path)
    assert code == 0


def test_cli(tmp_path, capsys):
    assert main(["list"]) == 0
    assert "affine_ellipse_k13" in capsys.readouterr().out
    assert main(["validate", str(FIXTURES / "bad_n.json")]) == 1
    assert "N below minimum 64" in capsys.readouterr().out
    assert main(["validate", "rotation"]) == 0
    assert main(["run", str(FIXTURES / "identity_small.toml"), "--out", str(tmp_path / "a"),
                 "--seed", "5", "--K-grid", "32x512"]) == 0
    data = json.loads((tmp_path / "a" / "report.json").read_text())
    assert data["scenario"]["seed"] == 5 and data["scenario"]["grids"]["qc"] == [32, 512]
    assert main(["run", str(FIXTURES / "affine_k2.json"), "--out", str(tmp_path / "b")]) == 1
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qcharmlab", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "rotation" in out.stdout
