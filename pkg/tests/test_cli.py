import json
import subprocess
import sys

import pytest

from sparsesampling.cli import SUBCOMMANDS, run
from sparsesampling.lp_space import PointSet

from conftest import SMALL_CLI_CONFIG


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL_CLI_CONFIG))
    return path


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_subcommand_list():
    assert set(SUBCOMMANDS) == {"discretize", "verify-usd", "rip-check", "incoherence", "recover", "rates",
                                "lebesgue", "oracle-compare", "plot"}


def test_discretize_writes_points_and_manifest(tmp_path, config_file):
    out = tmp_path / "o"
    assert run(["discretize", "--config", str(config_file), "--out", str(out)]) == 0
    m = manifest(out)
    assert m["status"] == "ok" and m["exit_code"] == 0 and m["seed"] == 5
    assert "points_v4.csv" in m["outputs"] and "discretize.json" in m["outputs"]
    pts = PointSet.from_csv(out / "points_v4.csv")
    assert pts.count == 75


def test_verify_usd_on_grid_and_on_too_few_points(tmp_path, config_file):
    out = tmp_path / "grid"
    assert run(["verify-usd", "--config", str(config_file), "--out", str(out), "--grid", "64"]) == 0
    report = json.loads((out / "usd_report.json").read_text())
    assert abs(report["lower_ratio"] - 1) < 1e-10 and abs(report["upper_ratio"] - 1) < 1e-10
    pts = tmp_path / "one.csv"
    PointSet([[0.3]]).to_csv(pts)
    out = tmp_path / "one"
    assert run(["verify-usd", "--config", str(config_file), "--out", str(out), "--points", str(pts)]) == 1
    assert manifest(out)["status"].startswith("failed")


@pytest.mark.parametrize("cmd", ["rip-check", "incoherence", "recover", "lebesgue", "oracle-compare"])
def test_subcommands_succeed(tmp_path, config_file, cmd):
    out = tmp_path / cmd
    assert run([cmd, "--config", str(config_file), "--out", str(out)]) == 0
    assert manifest(out)["result"]


def test_rates_then_plot(tmp_path, config_file):
    out = tmp_path / "r"
    code = run(["rates", "--config", str(config_file), "--out", str(out), "--threads", "2"])
    assert code in (0, 1)
    assert {"rates_nonlinear.csv", "rates_linear.json", "rates.svg"} <= set(manifest(out)["outputs"])
    out2 = tmp_path / "p"
    assert run(["plot", "--input", str(out), "--out", str(out2)]) == 0
    assert (out2 / "rates.svg").read_text() == (out / "rates.svg").read_text()


def test_usage_errors(tmp_path, capsys):
    assert run(["nope"]) == 2
    assert run(["discretize", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"v_grid": [1], "extra": 3}')
    assert run(["discretize", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "extra" in capsys.readouterr().err
    assert run(["plot", "--out", str(tmp_path / "empty")]) == 2


def test_seed_override(tmp_path, config_file):
    out = tmp_path / "s"
    run(["discretize", "--config", str(config_file), "--out", str(out), "--seed", "11"])
    assert manifest(out)["seed"] == 11 and manifest(out)["config"]["seed"] == 11


def test_module_entry_point(tmp_path, config_file):
    out = tmp_path / "m"
    proc = subprocess.run([sys.executable, "-m", "sparsesampling", "discretize", "--config", str(config_file),
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert manifest(out)["subcommand"] == "discretize"
