import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ansflow import experiments as ex
from ansflow.cli import EXIT_BLOWUP, EXIT_CHECK, EXIT_CONFIG, EXIT_OK, main
from ansflow.io import read_vector


def write_cfg(path, text):
    path.write_text(text)
    return str(path)


def test_parse_config_text():
    v = ex.parse_config_text("# comment\nseed = 3\ngrid.L1 = 2pi/8  # trailing\n"
                             "sweep.epsilon = 0.5, 0.25\n\n")
    assert v["seed"] == 3
    assert v["grid.L1"] == pytest.approx(2 * np.pi / 8)
    assert v["sweep.epsilon"] == (0.5, 0.25)
    with pytest.raises(ex.ConfigError, match="unknown key"):
        ex.parse_config_text("solver.viscosity = 1")
    with pytest.raises(ex.ConfigError, match="line 2"):
        ex.parse_config_text("seed = 1\nseed 2")
    with pytest.raises(ex.ConfigError, match="bad value"):
        ex.parse_config_text("grid.n1 = many")


def test_build_config_validation():
    cfg = ex.build_config("evolve", {}, {"solver.nu_h": 0.5})
    assert cfg.solver.nu_h == 0.5 and cfg.besov.nu_h == 0.5
    with pytest.raises(ex.ConfigError):
        ex.build_config("evolve", {"solver.dt": -1.0})
    with pytest.raises(ex.ConfigError):
        ex.build_config("sweep-eps", {"sweep.epsilon": (0.1, 0.05)})
    with pytest.raises(ex.ConfigError):
        ex.build_config("evolve", {"grid.n1": 7})


def test_loglog_slope():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert ex.loglog_slope(x, 3 * x**-0.75) == pytest.approx(-0.75)
    assert np.isnan(ex.loglog_slope([1.0], [1.0]))


def test_gen_and_norm(tmp_path):
    out = tmp_path / "o"
    assert main(["gen", "--out", str(out), "--grid", "32,32,32"]) == EXIT_OK
    u = read_vector(out / "u0.ansf")
    assert u.divergence_residual() < 1e-10
    assert main(["norm", "--out", str(out), "--input", str(out / "u0.ansf"), "--p", "4"]) == 0
    rows = list(csv.DictReader(open(out / "norms.csv")))
    names = {r["norm_name"] for r in rows}
    assert {"E_total", "E_besov_part", "E_forcing_part"} <= names
    assert all(float(r["nu_h"]) == 0.1 and int(r["seed"]) == 0 for r in rows)


def test_evolve_writes_outputs(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", "data.kind = random\ngrid.n1 = 16\ngrid.n2 = 16\n"
                    "grid.n3 = 16\nsolver.T = 0.05\nsolver.nu_3 = 0.1\nsolver.record_every = 5\n")
    out = tmp_path / "o"
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(open(out / "run.csv")))
    assert len(rows) == 6 and float(rows[-1]["div_residual"]) < 1e-10
    assert (out / "run_final.ansf").exists() and (out / "run_00001.ansf").exists()
    assert main(["evolve-w", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert (out / "run_w.csv").exists()


def test_blowup_exit_code(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", "data.kind = random\ndata.amplitude = 1e8\n"
                    "grid.n1 = 16\ngrid.n2 = 16\ngrid.n3 = 16\nsolver.T = 0.5\n"
                    "solver.dt = 0.1\nsolver.nu_h = 0.001\n")
    assert main(["evolve", "--config", cfg, "--out", str(tmp_path)]) == EXIT_BLOWUP


def test_config_errors(tmp_path, capsys):
    bad = write_cfg(tmp_path / "b.cfg", "no_such.key = 1\n")
    assert main(["gen", "--config", bad, "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "unknown key" in capsys.readouterr().err
    assert main(["gen", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert main(["gen", "--input", str(tmp_path / "missing.ansf"),
                 "--out", str(tmp_path)]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--grid", "1,2"])
    assert exc.value.code == EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == EXIT_CONFIG


def test_compare_rejects_inviscid_vertical(tmp_path):
    assert main(["compare", "--out", str(tmp_path), "--nu-3", "0"]) == EXIT_CONFIG


def test_check_negative_control(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", "check.suites = oracles\ncheck.phi_exponent = 1.25\n")
    assert main(["check", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CHECK
    rep = json.loads((tmp_path / "checks.json").read_text())
    assert rep["passed"] is False
    assert rep["suites"][0]["name"] == "partition" and not rep["suites"][0]["passed"]


def test_check_subset_passes(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", "check.suites = oracles, bernstein\n")
    assert main(["check", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "checks.json").read_text())
    assert [s["name"] for s in rep["suites"]] == ["partition", "oracles", "bernstein"]
    bad = write_cfg(tmp_path / "d.cfg", "check.suites = nope\n")
    assert main(["check", "--config", bad, "--out", str(tmp_path)]) == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ansflow", "gen", "--out", str(tmp_path),
                        "--grid", "32,32,32", "--seed", "1"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "u0.ansf").exists()


def test_sweep_small(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", "grid.n1 = 64\ngrid.n2 = 16\ngrid.n3 = 16\n"
                    "grid.L1 = 2pi/4\nsweep.epsilon = 0.25, 0.125, 0.0625, 0.03125\n"
                    "sweep.planar_n = 128\nsolver.nu_h = 1\nbesov.p = 4\nsweep.p = 4, 8\n"
                    "sweep.workers = 2\n")
    out = tmp_path / "o"
    assert main(["sweep-eps", "--config", cfg, "--out", str(out)]) == EXIT_OK
    slopes = {r["quantity"]: float(r["slope"])
              for r in csv.DictReader(open(out / "sweep_slopes.csv"))}
    assert slopes["dot_B1_alpha1"] == pytest.approx(1.0, abs=0.15)
    assert slopes["dot_Binf_sigma1"] == pytest.approx(1.0, abs=0.15)
    assert {"E_total_p4", "E_total_p8", "B4_variation"} <= set(slopes)
    rows = list(csv.DictReader(open(out / "sweep_efunctional.csv")))
    assert len(rows) == 8 and [float(r["p_value"]) for r in rows[:2]] == [4.0, 8.0]
    assert float(rows[0]["carrier"]) == 4.0
    points = sorted((out / "sweep_points").glob("sweep_efunctional_*.csv"))
    assert len(points) == 4
    merged = sum((list(csv.DictReader(open(f))) for f in points), [])
    assert merged == rows


def test_sweep_serial_matches_parallel(tmp_path):
    base = {"grid.n1": 64, "grid.n2": 16, "grid.n3": 16, "grid.L1": 2 * np.pi / 4,
            "sweep.epsilon": (0.25, 0.125, 0.0625, 0.03125), "sweep.prop1": False}
    a = ex.run_epsilon_sweep(ex.build_config("sweep-eps", base), write=False)
    b = ex.run_epsilon_sweep(ex.build_config("sweep-eps", {**base, "sweep.workers": 2}),
                             write=False)
    assert a.efunctional_rows == b.efunctional_rows
    with pytest.raises(ex.ConfigError):
        ex.build_config("sweep-eps", {**base, "sweep.p": (1.0,)})


def test_smallness_small(tmp_path):
    cfg = write_cfg(tmp_path / "c.cfg", "data.kind = random\ngrid.n1 = 16\ngrid.n2 = 16\n"
                    "grid.n3 = 16\nsolver.T = 0.05\nsolver.nu_3 = 0.1\nbesov.p = 4\n"
                    "smallness.amplitudes = 0, 0.01, 0.02\n")
    assert main(["smallness", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    rows = list(csv.DictReader(open(tmp_path / "smallness.csv")))
    assert float(rows[0]["ratio"]) == 0
    r1, r2 = float(rows[1]["ratio"]), float(rows[2]["ratio"])
    assert r2 == pytest.approx(r1, rel=0.2)
