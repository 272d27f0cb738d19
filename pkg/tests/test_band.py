"""Band construction, bandwidth formulas, and index lookups."""

import math

import numpy as np
import pytest

from cpmol import band as bd
from cpmol import geometry as geo
from cpmol.errors import OutOfBand


def test_bandwidth_formulas():
    # sqrt((d-1) ((p+1)/2)^2 + (1 + (p+1)/2)^2) * dx, plus diff reach
    dx = 0.1
    lam = bd.interp_bandwidth(2, 3, dx)
    assert lam == pytest.approx(math.sqrt(4.0 + 9.0) * dx)
    lam3 = bd.interp_bandwidth(3, 3, dx)
    assert lam3 == pytest.approx(math.sqrt(4.0 + 4.0 + 9.0) * dx)
    assert bd.total_bandwidth(2, 3, 1, dx) == pytest.approx(lam + dx)


def test_stencil_spec_validation():
    with pytest.raises(ValueError):
        bd.StencilSpec(diff_radius=0)
    with pytest.raises(ValueError):
        bd.StencilSpec(interp_degree=0)
    with pytest.raises(ValueError):
        bd.build_band(geo.Circle(), -0.1, bd.StencilSpec())


def test_circle_band_basic():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec(interp_degree=3))
    assert grid.d == 2
    assert np.all(grid.dist <= grid.bandwidth)
    # every stored cp is on the circle
    assert np.allclose(np.linalg.norm(grid.cp, axis=1), 1.0, atol=1e-12)
    # distances match |rho - 1|
    rho = np.linalg.norm(grid.points, axis=1)
    assert np.allclose(grid.dist, np.abs(rho - 1.0), atol=1e-12)
    assert np.any(grid.interior)
    assert np.any(~grid.interior)


def test_band_size_scales_linearly_for_curves():
    # band area ~ perimeter * bandwidth, so N ~ 1/dx^2 * dx = const/dx
    n1 = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec()).n_nodes
    n2 = bd.build_band(geo.Circle(), 0.05, bd.StencilSpec()).n_nodes
    assert 1.7 < n2 / n1 < 2.3


def test_interior_closed_under_differencing():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec())
    nodes = grid.nodes[grid.interior]
    for axis in range(grid.d):
        for sign in (-1, 1):
            nb = nodes.copy()
            nb[:, axis] += sign
            assert np.all(grid.index_of(nb) >= 0)


def test_interp_cubes_stay_interior():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec(interp_degree=3))
    p = grid.interp_degree
    offsets = np.stack(
        np.meshgrid(*([np.arange(p + 1)] * grid.d), indexing="ij"), axis=-1
    ).reshape(-1, grid.d)
    for q in grid.cp[::7]:
        base = bd.interp_stencil_base(grid, q)
        idx = grid.index_of(base + offsets)
        assert np.all(idx >= 0)
        assert np.all(grid.interior[idx])


def test_index_of_roundtrip_and_misses():
    grid = bd.build_band(geo.Circle(), 0.2, bd.StencilSpec())
    idx = grid.index_of(grid.nodes)
    assert np.array_equal(idx, np.arange(grid.n_nodes))
    assert grid.index_of([[999, 999]])[0] == -1


def test_out_of_band_query_raises():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec())
    with pytest.raises(OutOfBand):
        bd.interp_stencil_base(grid, [5.0, 5.0])


def test_even_degree_stencil_centering():
    grid = bd.rectangle_grid((10, 10), 1.0)
    grid = bd.BandedGrid(
        dx=grid.dx, d=grid.d, origin=grid.origin, nodes=grid.nodes,
        cp=grid.cp, dist=grid.dist, param=None, interior=grid.interior,
        bandwidth=0.0, interp_bandwidth=0.0, interp_degree=2, diff_radius=1,
    )
    # degree 2 cube centered on the nearest node: query at 4.4 -> base 3
    base = bd.interp_stencil_base(grid, [4.4, 4.6])
    assert list(base) == [3, 4]


def test_sphere_band_and_p_dependence():
    g3 = bd.build_band(geo.Sphere(), 0.2, bd.StencilSpec(interp_degree=3))
    g1 = bd.build_band(geo.Sphere(), 0.2, bd.StencilSpec(interp_degree=1))
    assert g1.n_nodes < g3.n_nodes
    assert g3.d == 3
    assert np.allclose(np.linalg.norm(g3.cp, axis=1), 1.0, atol=1e-12)


def test_mesh_band_builds():
    mesh = geo.load_mesh(geo.bundled_torus_path())
    grid = bd.build_band(mesh, 0.15, bd.StencilSpec(interp_degree=2))
    assert grid.n_nodes > 0
    assert grid.param is None


def test_rectangle_grid_interior_rim():
    grid = bd.rectangle_grid((5, 4), 0.5)
    assert grid.n_nodes == 20
    inner = grid.nodes[grid.interior]
    assert np.all(inner >= 1)
    assert np.all(inner[:, 0] <= 3)
    assert np.all(inner[:, 1] <= 2)


def test_write_band_csv(tmp_path):
    grid = bd.build_band(geo.Circle(), 0.2, bd.StencilSpec())
    path = tmp_path / "band.csv"
    bd.write_band_csv(grid, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "linear_index,i,j,x,y,cpx,cpy,dist"
    assert len(lines) == grid.n_nodes + 1
    cells = lines[1].split(",")
    assert float(cells[-1]) == pytest.approx(grid.dist[0])
