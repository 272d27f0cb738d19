"""End-to-end CLI runs against small problems, exit codes, determinism."""

import os
import re

import numpy as np
import pytest

from cpmol.cli import main
from cpmol.output import read_csv


def test_converge_heat_circle_two_grids(tmp_path):
    out = tmp_path / "conv.csv"
    rc = main([
        "converge", "--problem", "heat-circle", "--dx", "0.2,0.1",
        "--scheme", "forward-euler", "--t-end", "0.25", "--out", str(out),
    ])
    assert rc == 0
    meta, cols = read_csv(out)
    assert meta["command"] == "converge"
    assert len(cols["dx"]) == 2
    assert cols["max_err"][1] < cols["max_err"][0]
    assert float(meta["ls_slope"]) > 1.5
    assert "wall_time_s" in meta


def test_converge_single_dx_has_no_slope(tmp_path):
    out = tmp_path / "one.csv"
    rc = main([
        "converge", "--problem", "heat-circle", "--dx", "0.2",
        "--t-end", "0.1", "--out", str(out),
    ])
    assert rc == 0
    meta, cols = read_csv(out)
    assert len(cols["dx"]) == 1
    assert "ls_slope" not in meta


def test_converge_poisson(tmp_path):
    out = tmp_path / "poisson.csv"
    rc = main([
        "converge", "--problem", "poisson-circle", "--dx", "0.2,0.1",
        "--out", str(out),
    ])
    assert rc == 0
    meta, cols = read_csv(out)
    assert float(meta["ls_slope"]) > 1.5
    assert np.isnan(cols["dt"]).all()


def test_empty_dx_list_is_usage_error(tmp_path):
    rc = main([
        "converge", "--problem", "heat-circle", "--dx", ",",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 2


def test_unknown_problem_is_usage_error(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["converge", "--problem", "nonsense", "--dx", "0.2",
              "--out", str(tmp_path / "x.csv")])
    assert exc.value.code == 2


def test_blowup_is_numerical_failure(tmp_path):
    # forward Euler far past the stability limit
    rc = main([
        "converge", "--problem", "heat-circle", "--dx", "0.2",
        "--scheme", "forward-euler", "--dt-policy", "0.5",
        "--t-end", "50.0", "--gamma", "1e6", "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 3


def test_stability_scan_output(tmp_path):
    out = tmp_path / "stab.csv"
    rc = main([
        "stability-scan", "--gamma-list", "50,5000", "--dx", "0.2",
        "--out", str(out),
    ])
    assert rc == 0
    _, cols = read_csv(out)
    assert len(cols["gamma"]) == 2
    assert np.all(cols["dt_max_observed"] > 0)
    # the large-gamma case is penalty limited: prediction 2/gamma is tight
    assert cols["dt_predicted"][1] == pytest.approx(2.0 / 5000.0)
    ratio = cols["dt_max_observed"][1] / cols["dt_predicted"][1]
    assert 0.8 < ratio < 1.2


def test_gamma_sweep_marks_unstable_runs(tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main([
        "gamma-sweep", "--gamma-dx2-list", "4,12", "--dx", "0.2",
        "--scheme", "forward-euler", "--t-end", "0.2", "--out", str(out),
    ])
    assert rc == 0
    _, cols = read_csv(out)
    assert cols["stable"][0] == 1
    assert np.isfinite(cols["max_err"][0])
    assert cols["stable"][1] == 0
    assert np.isinf(cols["max_err"][1])


def test_curvature_check_circle(tmp_path):
    out = tmp_path / "curv.csv"
    rc = main(["curvature-check", "--surface", "circle", "--dx", "0.1",
               "--out", str(out)])
    assert rc == 0
    _, cols = read_csv(out)
    assert np.allclose(cols["kappa_exact"], 1.0)
    assert cols["abs_err"].max() < 0.05


def test_simulate_writes_snapshots_and_vtk(tmp_path):
    prefix = str(tmp_path / "gs")
    rc = main([
        "simulate", "--problem", "gray-scott", "--surface", "sphere",
        "--dx", "0.2", "--dt", "0.5", "--steps", "4", "--snap-every", "2",
        "--out", prefix,
    ])
    assert rc == 0
    names = sorted(os.listdir(tmp_path))
    assert "gs_step000000.csv" in names
    assert "gs_step000002.csv" in names
    assert "gs_step000004.csv" in names
    assert "gs_final_step000004.csv" in names
    assert "gs_step000000.vtk" in names
    meta, cols = read_csv(prefix + "_step000004.csv")
    assert set(cols) == {"linear_index", "u", "v"}
    assert meta["problem"] == "gray-scott"
    assert np.isfinite(cols["u"]).all()


def test_simulate_zero_steps_echoes_initial(tmp_path):
    prefix = str(tmp_path / "z")
    rc = main([
        "simulate", "--problem", "curvdiff-ellipse", "--surface", "ellipse",
        "--dx", "0.1", "--dt", "0.025", "--steps", "0", "--out", prefix,
    ])
    assert rc == 0
    _, cols = read_csv(prefix + "_step000000.csv")
    # initial condition cos(3 s) has amplitude 1
    assert cols["u"].max() == pytest.approx(1.0, abs=1e-12)
    assert not os.path.exists(prefix + "_final_step000000.csv")


def test_determinism_identical_up_to_wall_time(tmp_path):
    args = ["converge", "--problem", "heat-circle", "--dx", "0.2",
            "--t-end", "0.1", "--seed", "42"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    strip = lambda p: re.sub(r"# wall_time_s: .*", "", p.read_text())
    assert strip(a) == strip(b)


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CPMOL_THREADS", "1")
    monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
    rc = main(["converge", "--problem", "heat-circle", "--dx", "0.2",
               "--t-end", "0.1", "--out", str(tmp_path / "t.csv")])
    assert rc == 0
    assert os.environ["OMP_NUM_THREADS"] == "1"
