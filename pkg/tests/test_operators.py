"""Difference operators and tensor-product Lagrange interpolation."""

import numpy as np
import pytest
import scipy.sparse as sp

from cpmol import band as bd
from cpmol import geometry as geo
from cpmol import operators as ops
from cpmol.errors import MissingNeighbour, OutOfBand


def _box(shape=(12, 12), dx=0.25):
    return bd.rectangle_grid(shape, dx)


def test_laplacian_exact_on_quadratics():
    grid = _box()
    x, y = grid.points.T
    L = ops.laplacian(grid)
    inner = grid.interior
    for u, lap in [
        (x * x, 2.0),
        (y * y, 2.0),
        (x * y, 0.0),
        (1.0 + 0.0 * x, 0.0),
        (3 * x - 2 * y, 0.0),
        (x * x - y * y, 0.0),
    ]:
        u = np.broadcast_to(u, len(x)).astype(float)
        res = L @ u
        assert np.allclose(res[inner], lap, atol=1e-10)


def test_laplacian_truncation_order():
    # second differences of sin(x) have O(dx^2) error
    errs = []
    for dx in (0.2, 0.1):
        grid = bd.rectangle_grid((int(4 / dx), 8), dx)
        x = grid.points[:, 0]
        L = ops.laplacian(grid)
        res = (L @ np.sin(x)) + np.sin(x)
        errs.append(np.abs(res[grid.interior]).max())
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_one_sided_differences_and_average():
    grid = _box()
    x, y = grid.points.T
    u = 2.0 * x + 3.0 * y
    inner = grid.interior
    assert np.allclose((ops.diff_forward(grid, 0) @ u)[inner], 2.0)
    assert np.allclose((ops.diff_backward(grid, 1) @ u)[inner], 3.0)
    # forward average of a linear field is the midpoint value
    av = (ops.avg_forward(grid, 0) @ u)[inner]
    assert np.allclose(av, u[inner] + grid.dx)


def test_flux_form_matches_laplacian_for_constant_coefficient():
    grid = _box()
    L = ops.laplacian(grid)
    parts = []
    for axis in range(grid.d):
        Df = ops.diff_forward(grid, axis)
        Db = ops.diff_backward(grid, axis)
        parts.append(Db @ Df)
    M = parts[0] + parts[1]
    inner = np.where(grid.interior)[0]
    diff = (L - M).tocsr()[inner]
    assert abs(diff).max() < 1e-12


def test_laplacian_rows_opportunistic_on_band():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec())
    L = ops.laplacian(grid)
    ok = ops.valid_laplacian_rows(grid)
    assert np.all(ok[grid.interior])
    # rows without a full stencil are zeroed, not garbage
    missing = ~ok
    assert abs(L[np.where(missing)[0]]).max() == 0.0


def test_missing_neighbour_detected():
    grid = bd.rectangle_grid((4, 4), 1.0)
    # claim everything is interior: the rim now demands absent neighbours
    grid.interior[:] = True
    with pytest.raises(MissingNeighbour):
        ops.laplacian(grid)


def test_interpolation_exact_on_degree_p():
    grid = _box((14, 14), 0.2)
    rng = np.random.default_rng(3)
    q = rng.uniform(0.4, 2.2, size=(40, 2))
    for p in (1, 2, 3, 4):
        A = ops.interpolation_matrix(grid, q, p=p)
        x, y = grid.points.T
        u = (0.3 + x) ** p + (1.1 - y) ** p + (x * y) ** (p // 2)
        exact = (0.3 + q[:, 0]) ** p + (1.1 - q[:, 1]) ** p + (
            q[:, 0] * q[:, 1]
        ) ** (p // 2)
        assert np.abs(A @ u - exact).max() < 1e-10


def test_interpolation_row_sums_and_node_reproduction():
    grid = _box()
    sel = np.where(np.all((grid.nodes >= 2) & (grid.nodes <= 9), axis=1))[0][:30]
    A = ops.interpolation_matrix(grid, grid.points[sel], p=3)
    ones = np.ones(grid.n_nodes)
    assert np.abs(A @ ones - 1.0).max() < 1e-12
    # interpolating at grid nodes reproduces nodal values
    u = np.sin(grid.points[:, 0]) * np.cos(grid.points[:, 1])
    assert np.abs(A @ u - u[sel]).max() < 1e-12


def test_interpolation_out_of_band():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec())
    with pytest.raises(OutOfBand):
        ops.interpolation_matrix(grid, np.array([[4.0, 4.0]]))


def test_extension_matrix_shape_and_idempotence_on_extended_data():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec(interp_degree=3))
    E = ops.extension_matrix(grid)
    assert E.shape == (grid.n_nodes, grid.n_nodes)
    assert np.abs(E @ np.ones(grid.n_nodes) - 1.0).max() < 1e-12
    # E v depends only on surface values, so smooth radial dependence is
    # flattened: E of f(cp) reproduces f(cp) to interpolation accuracy
    theta = np.arctan2(grid.cp[:, 1], grid.cp[:, 0])
    v = np.cos(theta)
    err = np.abs(E @ v - v).max()
    assert err < 5e-4


def test_extension_nearly_idempotent():
    grid = bd.build_band(geo.Circle(), 0.1, bd.StencilSpec(interp_degree=3))
    E = ops.extension_matrix(grid)
    v = np.sin(3.0 * np.arctan2(grid.points[:, 1], grid.points[:, 0]))
    e1 = E @ v
    e2 = E @ e1
    assert np.abs(e2 - e1).max() < 1e-2 * np.abs(e1).max()


def test_cp_consistency_of_extension():
    # E u at a node equals interpolation of u at that node's cp
    grid = bd.build_band(geo.Circle(), 0.2, bd.StencilSpec())
    E = ops.extension_matrix(grid)
    A = ops.interpolation_matrix(grid, grid.cp)
    u = np.exp(grid.points[:, 0])
    assert np.abs(E @ u - A @ u).max() < 1e-14


def test_matrix_market_roundtrip(tmp_path):
    import scipy.io

    grid = bd.build_band(geo.Circle(), 0.2, bd.StencilSpec())
    L = ops.laplacian(grid)
    path = tmp_path / "L.mtx"
    ops.write_matrix_market(path, L)
    back = scipy.io.mmread(path).tocsr()
    assert abs(L - back).max() < 1e-15


def test_matrices_are_csr_with_sorted_indices():
    grid = bd.build_band(geo.Circle(), 0.2, bd.StencilSpec())
    for M in (ops.laplacian(grid), ops.extension_matrix(grid)):
        assert sp.issparse(M) and M.format == "csr"
        assert M.has_sorted_indices
