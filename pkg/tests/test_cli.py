"""Command line surface: artifacts, exit codes, config handling."""
import json
import os
import shutil
import subprocess
import sys

import pytest

QUE = shutil.which("que")


def run_que(*args, cwd=None, env_extra=None):
    if QUE:
        cmd = [QUE, *args]
    else:
        cmd = [sys.executable, "-m", "quecert.cli", *args]
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        cmd, cwd=cwd, env=env, capture_output=True, text=True, timeout=300
    )


def test_build_writes_levelgraph(tmp_path):
    out = tmp_path / "o"
    r = run_que("build", "--model", "interval", "--level", "2", "--out", str(out))
    assert r.returncode == 0, r.stderr
    doc = json.loads((out / "levelgraph_interval_2.json").read_text())
    assert doc["schema"] == "levelgraph/1"
    assert len(doc["vertices"]) == 5
    assert (out / "cache").is_dir()


def test_certify_writes_certificate(tmp_path):
    out = tmp_path / "o"
    r = run_que("certify", "--model", "interval", "--level", "1", "--fine", "5",
                "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert "delta_total=" in r.stdout
    doc = json.loads((out / "cert_interval_1_5.json").read_text())
    assert doc["schema"] == "que-cert/1"
    assert doc["delta_total"] <= doc["paper_bound"]


def test_spectrum_csv_format(tmp_path):
    out = tmp_path / "o"
    r = run_que("spectrum", "--model", "interval", "--level", "2", "--out", str(out))
    assert r.returncode == 0, r.stderr
    lines = (out / "spectrum_interval_2.csv").read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert "," in header
    rows = [l for l in lines if not l.startswith("#")][1:]
    assert len(rows) == 5
    # decimal point, full 17 significant digits round-trip
    val = rows[1].split(",")[1]
    assert "." in val and float(val) == pytest.approx(
        2.0 * 16.0 * (1.0 - __import__("math").cos(__import__("math").pi / 4)),
        rel=1e-15,
    )


def test_converge_outputs(tmp_path):
    out = tmp_path / "o"
    r = run_que("converge", "--model", "interval", "--level", "4", "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert (out / "converge_interval_k1.csv").exists()
    svg = (out / "converge_interval_k1.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_compare_and_violation_window(tmp_path):
    out = tmp_path / "o"
    r = run_que("compare", "--model", "interval", "--level", "2", "--fine", "6",
                "--out", str(out))
    assert r.returncode == 0, r.stderr
    # window edge exactly on an eigenvalue: numerical refusal, exit 2
    r = run_que("compare", "--model", "interval", "--level", "2", "--fine", "6",
                "--window", "0,4", "--out", str(out))
    assert r.returncode == 2


def test_compose(tmp_path):
    out = tmp_path / "o"
    r = run_que("compose", "--model", "interval", "--level", "1", "--mid", "2",
                "--fine", "4", "--out", str(out))
    assert r.returncode == 0, r.stderr
    doc = json.loads((out / "compose_interval_1_2_4.json").read_text())
    assert doc["form_ok"] and doc["operator"]["ok"]


def test_obstacle_sweep(tmp_path):
    out = tmp_path / "o"
    r = run_que("obstacle", "--n-grid", "64", "--out", str(out))
    assert r.returncode == 0, r.stderr
    csv = (out / "obstacle_N64.csv").read_text()
    assert "delta_slope" in csv
    assert (out / "obstacle_N64.svg").exists()


def test_report_collects_certificates(tmp_path):
    out = tmp_path / "o"
    for m in ("1", "2", "3"):
        r = run_que("certify", "--model", "interval", "--level", m, "--fine", "6",
                    "--out", str(out))
        assert r.returncode == 0, r.stderr
    r = run_que("report", "--out", str(out))
    assert r.returncode == 0, r.stderr
    rep = json.loads((out / "report.json").read_text())
    v = rep["verdicts"]["interval"]
    assert v["verdict"] == "converges in generalised norm resolvent sense"
    md = (out / "report.md").read_text()
    assert "cert_interval_3_6.json" in md


def test_report_on_empty_dir(tmp_path):
    out = tmp_path / "empty"
    out.mkdir()
    r = run_que("report", "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert (out / "report.json").exists()


def test_usage_errors(tmp_path):
    out = str(tmp_path / "o")
    assert run_que("build", "--model", "hexagon", "--out", out).returncode == 1
    assert run_que("certify", "--model", "interval", "--level", "9",
                   "--out", out).returncode == 1
    assert run_que("compose", "--model", "interval", "--level", "1",
                   "--out", out).returncode == 1
    assert run_que("certify", "--model", "interval", "--level", "3", "--fine", "2",
                   "--out", out).returncode == 1


def test_config_file(tmp_path):
    cfgfile = tmp_path / "run.ini"
    cfgfile.write_text("[que]\nmodel = gasket\nlevel = 1\n")
    out = tmp_path / "o"
    r = run_que("build", "--config", str(cfgfile), "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert (out / "levelgraph_gasket_1.json").exists()
    # flags beat the file
    r = run_que("build", "--config", str(cfgfile), "--model", "interval",
                "--out", str(out))
    assert r.returncode == 0
    assert (out / "levelgraph_interval_1.json").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text("[que]\nmodell = interval\n")
    assert run_que("build", "--config", str(bad), "--out", str(out)).returncode == 1


def test_cache_env_var(tmp_path):
    cache = tmp_path / "cachehome"
    out = tmp_path / "o"
    r = run_que("build", "--model", "interval", "--level", "1", "--out", str(out),
                env_extra={"QUE_CACHE_DIR": str(cache)})
    assert r.returncode == 0, r.stderr
    assert list(cache.glob("pencil_v1_*.json"))
    assert not (out / "cache").exists()


def test_corrupt_cache_rebuilds(tmp_path):
    out = tmp_path / "o"
    assert run_que("build", "--model", "interval", "--level", "2",
                   "--out", str(out)).returncode == 0
    victim = next((out / "cache").glob("pencil_v1_*.json"))
    victim.write_text("{not json")
    r = run_que("build", "--model", "interval", "--level", "2", "--out", str(out))
    assert r.returncode == 0, r.stderr
    json.loads(victim.read_text())  # rewritten clean
