"""Frontend tests against hand-written artifact files."""

import numpy as np
import pytest

from cpmol_plots import (
    MissingColumn,
    plot_convergence,
    plot_gamma_sweep,
    plot_stability,
    plot_surface_scatter,
    read_manifest_csv,
    read_vtk_points,
)
from cpmol_plots.cli import main
from cpmol_plots.plots import predicted_dt


def _write_conv_csv(path, dx, err, p=3, extra_series=None):
    lines = [
        "# command: converge",
        "# problem: heat-circle",
        "# wall_time_s: 1.000",
        "dx,dt,p,gamma,max_err,samples",
    ]
    rows = [(d, p, e) for d, e in zip(dx, err)]
    if extra_series:
        rows += [(d, extra_series[0], e) for d, e in zip(dx, extra_series[1])]
    for d, pp, e in rows:
        lines.append(f"{d},{d*d/4},{pp},{4/d**2},{e:.17g},100")
    slope = np.polyfit(np.log(dx), np.log(err), 1)[0]
    lines.append(f"# ls_slope = {slope:.17g}")
    path.write_text("\n".join(lines) + "\n")
    return slope


def _write_vtk(path, n=8, value=None):
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((n, 3))
    vals = np.full(n, value) if value is not None else rng.uniform(size=n)
    lines = [
        "# vtk DataFile Version 3.0", "snap", "ASCII", "DATASET POLYDATA",
        f"POINTS {n} double",
    ]
    lines += [" ".join(f"{x:.17g}" for x in row) for row in pts]
    lines.append(f"VERTICES {n} {2*n}")
    lines += [f"1 {i}" for i in range(n)]
    lines += [f"POINT_DATA {n}", "SCALARS u double 1", "LOOKUP_TABLE default"]
    lines += [f"{v:.17g}" for v in vals]
    path.write_text("\n".join(lines) + "\n")
    return pts, vals


def test_read_manifest_csv(tmp_path):
    csv = tmp_path / "c.csv"
    _write_conv_csv(csv, [0.2, 0.1], [1e-2, 2.5e-3])
    meta, cols = read_manifest_csv(csv)
    assert meta["problem"] == "heat-circle"
    assert "ls_slope" in meta
    assert np.allclose(cols["dx"], [0.2, 0.1])


def test_convergence_plot_and_slope(tmp_path):
    csv = tmp_path / "c.csv"
    # exact second-order data: slope annotation must say 2.00
    dx = np.array([0.2, 0.1, 0.05, 0.025])
    _write_conv_csv(csv, dx, 0.5 * dx**2)
    out = tmp_path / "c.png"
    info = plot_convergence(csv, out)
    assert out.stat().st_size > 0
    assert info["slope"] == pytest.approx(2.0, abs=1e-12)
    assert info["xscale"] == "log" and info["yscale"] == "log"


def test_convergence_multiple_p_series(tmp_path):
    csv = tmp_path / "c.csv"
    dx = np.array([0.2, 0.1])
    _write_conv_csv(csv, dx, 0.5 * dx**2, p=3,
                    extra_series=(1, 0.2 * dx))
    info = plot_convergence(csv, tmp_path / "c.png")
    assert info["series"] == 2
    # annotated slope belongs to the highest-degree series
    assert info["slope"] == pytest.approx(2.0, abs=1e-12)


def test_convergence_missing_column(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("# command: x\na,b\n1,2\n")
    with pytest.raises(MissingColumn):
        plot_convergence(csv, tmp_path / "x.png")


def test_predicted_bound_formula():
    assert predicted_dt(1.0, 0.1, d=2) == pytest.approx(0.0025)
    assert predicted_dt(1e6, 0.1, d=2) == pytest.approx(2e-6)


def test_stability_plot(tmp_path):
    csv = tmp_path / "s.csv"
    g = np.array([1600.0, 16000.0])
    pred = predicted_dt(g, 0.05)
    lines = ["# command: stability-scan", "# dx: 0.05",
             "gamma,dt_max_observed,dt_predicted"]
    lines += [f"{gi},{p*1.1:.17g},{p:.17g}" for gi, p in zip(g, pred)]
    csv.write_text("\n".join(lines) + "\n")
    out = tmp_path / "s.png"
    info = plot_stability(csv, out)
    assert out.stat().st_size > 0
    assert info["points"] == 2
    assert info["xscale"] == "log"


def test_gamma_sweep_plot_marks_unstable(tmp_path):
    csv = tmp_path / "g.csv"
    lines = ["# command: gamma-sweep", "gamma_dx2,gamma,max_err,stable",
             "4,400,1e-3,1", "9,900,inf,0"]
    csv.write_text("\n".join(lines) + "\n")
    info = plot_gamma_sweep(csv, tmp_path / "g.png")
    assert info["n_stable"] == 1
    assert info["n_unstable"] == 1


def test_vtk_roundtrip_and_scatter(tmp_path):
    vtk = tmp_path / "p.vtk"
    pts, vals = _write_vtk(vtk)
    back_pts, scalars = read_vtk_points(vtk)
    assert np.array_equal(back_pts, pts)
    assert np.array_equal(scalars["u"], vals)
    info = plot_surface_scatter(vtk, tmp_path / "p.png")
    assert info["points"] == len(pts)
    assert (tmp_path / "p.png").stat().st_size > 0


def test_scatter_constant_field_single_color(tmp_path):
    vtk = tmp_path / "c.vtk"
    _write_vtk(vtk, value=0.7)
    info = plot_surface_scatter(vtk, tmp_path / "c.png")
    assert info["vmin"] == info["vmax"] == 0.7


def test_scatter_empty_file_errors(tmp_path):
    vtk = tmp_path / "e.vtk"
    vtk.write_text("")
    with pytest.raises(ValueError):
        plot_surface_scatter(vtk, tmp_path / "e.png")


def test_scatter_unknown_field(tmp_path):
    vtk = tmp_path / "f.vtk"
    _write_vtk(vtk)
    with pytest.raises(KeyError):
        plot_surface_scatter(vtk, tmp_path / "f.png", field="missing")


def test_plot_does_not_mutate_input(tmp_path):
    csv = tmp_path / "c.csv"
    dx = np.array([0.2, 0.1])
    _write_conv_csv(csv, dx, 0.5 * dx**2)
    before = csv.read_bytes()
    plot_convergence(csv, tmp_path / "c.png")
    assert csv.read_bytes() == before


def test_cli_subcommands(tmp_path, capsys):
    csv = tmp_path / "c.csv"
    dx = np.array([0.2, 0.1])
    _write_conv_csv(csv, dx, 0.5 * dx**2)
    out = tmp_path / "cli.png"
    assert main(["convergence", str(csv), "--out", str(out)]) == 0
    assert out.exists()
    assert "slope 2.00" in capsys.readouterr().out
    assert main(["convergence", str(tmp_path / "nope.csv"),
                 "--out", str(out)]) == 2
