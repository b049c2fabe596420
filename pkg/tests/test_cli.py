import csv
import json
import subprocess
import sys

import pytest

from scf.cli import main
from scf.config_io import dump_config, fixture_path, load_fixture


@pytest.fixture()
def ex3_path():
    return str(fixture_path("EX3"))


@pytest.fixture()
def ex2_path():
    return str(fixture_path("EX2"))


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_console_script_help_runs():
    proc = subprocess.run([sys.executable, "-m", "scf.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "classify" in proc.stdout


def test_classify_stdout_csv(ex3_path, capsys):
    code = main(["classify", "--config", ex3_path, "--s0", "0.3,0.01,1.0", "--x0", "0.31"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("key,value\n")
    assert "verdict,ConvergesToPeriodic" in out
    assert "n_rho,5" in out


def test_classify_json_and_file_output(ex3_path, tmp_path, capsys):
    code = main(["classify", "--config", ex3_path, "--s0", "0.3,0.01,1.0",
                 "--x0", "0.29", "--format", "json-doc", "--out", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["verdict"] == "FailsAfterFinitelyManyCycles"
    assert doc == json.loads(capsys.readouterr().out)


def test_classify_exit_codes(ex3_path, tmp_path, capsys):
    assert main(["classify", "--config", str(tmp_path / "missing.toml")]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("n = 3\n")
    assert main(["classify", "--config", str(bad)]) == 2
    # wrong arity in --s0
    assert main(["classify", "--config", ex3_path, "--s0", "0.3,0.01"]) == 2
    capsys.readouterr()


def test_set_overrides_change_the_answer(ex3_path, capsys):
    code = main(["classify", "--config", ex3_path, "--set", "r=0.9"])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict,ConvergesToPeriodic" in out
    code = main(["classify", "--config", ex3_path, "--set", "s_in.1=0.002"])
    out = capsys.readouterr().out
    assert code == 0
    assert "region_of_input,Omega0" in out
    assert "verdict,FailOmega0" in out


def test_simulate_writes_tables_and_figures(ex3_path, tmp_path, capsys):
    code = main(["simulate", "--config", ex3_path, "--s0", "0.3,0.01,1.0",
                 "--x0", "0.29", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "outcome,Washout" in out
    rows = read_csv(tmp_path / "trajectory.csv")
    assert rows[0] == ["t", "s1", "s2", "s3", "x", "phase", "proj_s1", "proj_s2"]
    assert any(row[5] == "impulse" for row in rows[1:])
    cycles = read_csv(tmp_path / "cycles.csv")
    assert cycles[0][:4] == ["k", "t_minus", "duration", "s1_minus"]
    assert len(cycles) - 1 <= 4
    assert (tmp_path / "trajectory.png").stat().st_size > 0
    assert (tmp_path / "projection.png").stat().st_size > 0


def test_simulate_requires_start(ex3_path, capsys):
    assert main(["simulate", "--config", ex3_path]) == 2
    assert "requires both" in capsys.readouterr().err


def test_projection_column_picks_tightest_resource(ex2_path, tmp_path, capsys):
    code = main(["simulate", "--config", ex2_path, "--s0", "1.0,1.0,1.0",
                 "--x0", "0.5", "--out", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    header = read_csv(tmp_path / "trajectory.csv")[0]
    assert header[-2:] == ["proj_s1", "proj_s3"]


def test_mu_sweep_outputs(ex2_path, tmp_path, capsys):
    code = main(["mu-sweep", "--config", ex2_path, "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "r_star,none" in out
    rows = read_csv(tmp_path / "mu_sweep.csv")
    assert rows[0] == ["r", "mu", "note"]
    assert len(rows) == 201  # 200 grid points, no crossing row
    assert all(float(row[1]) <= 0.0 for row in rows[1:])
    assert (tmp_path / "mu_sweep.png").stat().st_size > 0


def test_find_rstar_none_and_json(ex2_path, capsys):
    assert main(["find-rstar", "--config", ex2_path]) == 0
    assert "r_star,none" in capsys.readouterr().out
    assert main(["find-rstar", "--config", ex2_path, "--format", "json-doc"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["r_star"] == "none"
    assert doc["mu_at_full_exchange"] < 0


def test_basin_grid(ex3_path, tmp_path, capsys):
    code = main(["basin", "--config", ex3_path, "--s0", "0.26:0.34:3,0.005:0.1:3,1.0",
                 "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    assert "points,9" in out
    rows = read_csv(tmp_path / "basin.csv")
    assert rows[0] == ["s1", "s2", "s3", "region", "x_threshold"]
    assert len(rows) == 10
    regions = {row[3] for row in rows[1:]}
    assert regions <= {"Omega0", "Omega1", "BoundaryOmega1"}
    for row in rows[1:]:
        if row[3] == "Omega1":
            float(row[4])
        else:
            assert row[4] == ""


def test_basin_requires_grid(ex3_path, capsys):
    assert main(["basin", "--config", ex3_path]) == 2
    capsys.readouterr()


def test_basin_rejects_subthreshold_axis(ex3_path, capsys):
    assert main(["basin", "--config", ex3_path, "--s0", "0.1:0.2:3,0.05,0.5"]) == 2
    assert "below the decant threshold" in capsys.readouterr().err


def test_config_override_path_errors(ex3_path, capsys):
    assert main(["classify", "--config", ex3_path, "--set", "bogus=1"]) == 2
    capsys.readouterr()


def test_dump_config_round_trips_fixture(tmp_path):
    cfg = load_fixture("EX1")
    p = tmp_path / "ex1.toml"
    p.write_text(dump_config(cfg))
    code = main(["classify", "--config", str(p)])
    assert code == 0
