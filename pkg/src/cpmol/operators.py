"""Sparse operators over band indices.

Finite difference matrices (Laplacian, one-sided differences, forward
averages) and the closest point extension matrix built from tensor-product
Lagrange interpolation.  All matrices are scipy CSR with deterministic,
sorted entries.

Difference rows are built for every node whose full stencil lies in the
band; this covers all interior nodes (guaranteed by band closure) plus
most of the outer shell.  Rows that cannot close are left zero — they are
never read by the assembled products, which only interpolate from interior
nodes.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .band import BandedGrid, _stencil_base_many
from .errors import MissingNeighbour, OutOfBand

__all__ = [
    "laplacian",
    "diff_forward",
    "diff_backward",
    "avg_forward",
    "extension_matrix",
    "interpolation_matrix",
    "valid_laplacian_rows",
    "write_matrix_market",
]


def _neighbour_indices(grid: BandedGrid, axis: int, shift: int) -> np.ndarray:
    nb = grid.nodes.copy()
    nb[:, axis] += shift
    return grid.index_of(nb)


def valid_laplacian_rows(grid: BandedGrid) -> np.ndarray:
    """Mask of nodes whose full 2d-point difference stencil is in the band."""
    ok = np.ones(grid.n_nodes, dtype=bool)
    for axis in range(grid.d):
        for shift in (-1, 1):
            ok &= _neighbour_indices(grid, axis, shift) >= 0
    return ok


def laplacian(grid: BandedGrid) -> sp.csr_array:
    """Standard 5-point (2D) / 7-point (3D) discrete Laplacian.

    Row n carries -2d/dx^2 on the diagonal and 1/dx^2 for each axis
    neighbour.  Raises MissingNeighbour if an interior node's stencil
    leaves the band (impossible after build_band).
    """
    n = grid.n_nodes
    inv2 = 1.0 / (grid.dx * grid.dx)
    rows, cols, vals = [], [], []
    valid = np.ones(n, dtype=bool)
    nbrs = []
    for axis in range(grid.d):
        for shift in (-1, 1):
            idx = _neighbour_indices(grid, axis, shift)
            nbrs.append(idx)
            valid &= idx >= 0
    if np.any(grid.interior & ~valid):
        raise MissingNeighbour("interior node lost a Laplacian neighbour")
    where = np.nonzero(valid)[0]
    rows.append(where)
    cols.append(where)
    vals.append(np.full(len(where), -2.0 * grid.d * inv2))
    for idx in nbrs:
        rows.append(where)
        cols.append(idx[where])
        vals.append(np.full(len(where), inv2))
    mat = sp.csr_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def _one_sided(grid: BandedGrid, axis: int, shift: int, coeffs) -> sp.csr_array:
    """Two-point operator: coeffs[0] at node, coeffs[1] at node + shift*e."""
    n = grid.n_nodes
    idx = _neighbour_indices(grid, axis, shift)
    valid = idx >= 0
    if np.any(grid.interior & ~valid):
        raise MissingNeighbour(
            f"interior node lost its axis-{axis} neighbour"
        )
    where = np.nonzero(valid)[0]
    rows = np.concatenate([where, where])
    cols = np.concatenate([where, idx[where]])
    vals = np.concatenate(
        [np.full(len(where), coeffs[0]), np.full(len(where), coeffs[1])]
    )
    mat = sp.csr_array((vals, (rows, cols)), shape=(n, n))
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def diff_forward(grid: BandedGrid, axis: int) -> sp.csr_array:
    """(v[n + e] - v[n]) / dx."""
    return _one_sided(grid, axis, +1, (-1.0 / grid.dx, 1.0 / grid.dx))


def diff_backward(grid: BandedGrid, axis: int) -> sp.csr_array:
    """(v[n] - v[n - e]) / dx."""
    return _one_sided(grid, axis, -1, (1.0 / grid.dx, -1.0 / grid.dx))


def avg_forward(grid: BandedGrid, axis: int) -> sp.csr_array:
    """Forward two-point average, the half-point value (v[n] + v[n+e])/2."""
    return _one_sided(grid, axis, +1, (0.5, 0.5))


def _lagrange_weights_1d(t: np.ndarray, p: int) -> np.ndarray:
    """Degree-p Lagrange basis at integer nodes 0..p, evaluated at t.

    Direct product form; exact (0/1 rows) when t hits a node, and stable
    for the small degrees used here (p <= 5).
    """
    m = len(t)
    w = np.ones((m, p + 1))
    for j in range(p + 1):
        for i in range(p + 1):
            if i != j:
                w[:, j] *= (t - i) / (j - i)
    return w


def interpolation_matrix(grid: BandedGrid, points: np.ndarray, p: int | None = None) -> sp.csr_array:
    """Sparse matrix interpolating band data at arbitrary points.

    Row per query point: tensor-product Lagrange weights of degree p over
    the (p+1)^d node cube around the point.  Rows sum to 1.
    """
    if p is None:
        p = grid.interp_degree
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m, d = points.shape
    base = _stencil_base_many(grid, points, p)
    t = (points - grid.origin) / grid.dx - base

    axis_w = [_lagrange_weights_1d(t[:, ax], p) for ax in range(d)]
    offsets = np.stack(
        np.meshgrid(*([np.arange(p + 1)] * d), indexing="ij"), axis=-1
    ).reshape(-1, d)
    n_st = len(offsets)

    cols = np.empty((m, n_st), dtype=np.int64)
    vals = np.ones((m, n_st))
    for k, off in enumerate(offsets):
        idx = grid.index_of(base + off)
        if np.any(idx < 0):
            bad = points[np.nonzero(idx < 0)[0][0]]
            raise OutOfBand(f"interpolation cube at {bad} leaves the band")
        cols[:, k] = idx
        for ax in range(d):
            vals[:, k] *= axis_w[ax][:, off[ax]]

    rows = np.repeat(np.arange(m), n_st)
    mat = sp.csr_array(
        (vals.ravel(), (rows, cols.ravel())), shape=(m, grid.n_nodes)
    )
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def extension_matrix(grid: BandedGrid, p: int | None = None) -> sp.csr_array:
    """Discrete closest point extension E_p.

    Row n interpolates band data at cp(n); applying E_p replaces each
    node's value by the interpolated surface value at its closest point.
    """
    return interpolation_matrix(grid, grid.cp, p)


def write_matrix_market(path, mat):
    """Dump an operator in MatrixMarket coordinate format (debugging)."""
    from scipy.io import mmwrite

    mmwrite(str(path), sp.coo_array(mat))
