"""Discrete computational band around a surface.

The band is the set of uniform Cartesian grid nodes within a bandwidth of
the surface, stored with per-node closest points and a dense index lookup.
Two nested node sets are kept:

* the full band (all stored nodes, where extension rows are built), and
* the *interior* (nodes within the interpolation bandwidth), on which
  difference stencils are guaranteed to close.

Every interpolation stencil ever used lands entirely inside the interior,
so products like E*L only read difference rows that are fully defined.  A
band in which *every* node had all difference neighbours would have no
outermost layer, so stencil closure is verified in this two-tier form.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import BandNotClosed, OutOfBand
from .geometry import Surface

__all__ = [
    "StencilSpec",
    "BandedGrid",
    "build_band",
    "interp_stencil_base",
    "interp_bandwidth",
    "total_bandwidth",
    "rectangle_grid",
    "write_band_csv",
]


@dataclasses.dataclass(frozen=True)
class StencilSpec:
    """Stencil reach the band must accommodate.

    diff_radius: per-axis reach of the difference stencils (1 for the
        5/7-point Laplacian).
    interp_degree: per-axis polynomial degree p of the extension stencil,
        (p+1)^d nodes.
    """

    diff_radius: int = 1
    interp_degree: int = 3

    def __post_init__(self):
        if self.diff_radius < 1:
            raise ValueError("diff_radius must be >= 1")
        if self.interp_degree < 1:
            raise ValueError("interp_degree must be >= 1")


def interp_bandwidth(d: int, p: int, dx: float) -> float:
    """Bandwidth guaranteeing interpolation stencils stay in the band."""
    half = (p + 1) / 2.0
    return math.sqrt((d - 1) * half * half + (1.0 + half) ** 2) * dx


def total_bandwidth(d: int, p: int, diff_radius: int, dx: float) -> float:
    """Interpolation bandwidth enlarged for the difference stencils.

    Difference neighbours are axis-aligned, so each step extends the
    distance to the surface by at most dx.
    """
    return interp_bandwidth(d, p, dx) + diff_radius * dx


@dataclasses.dataclass
class BandedGrid:
    """Cartesian band nodes with closest points and index maps.

    nodes are integer multi-indices (lexicographically ordered); physical
    coordinates are origin + dx * node.  band_index (the multi-index ->
    [0, N) bijection) is realized by a dense lookup array over the
    bounding box.
    """

    dx: float
    d: int
    origin: np.ndarray
    nodes: np.ndarray  # (N, d) int64
    cp: np.ndarray  # (N, d)
    dist: np.ndarray  # (N,)
    param: np.ndarray | None  # (N, k) or None
    interior: np.ndarray  # (N,) bool
    bandwidth: float
    interp_bandwidth: float
    interp_degree: int
    diff_radius: int
    surface: Surface | None = None
    _extents: np.ndarray | None = None
    _lookup: np.ndarray | None = None

    def __post_init__(self):
        if self._lookup is None:
            lo = self.nodes.min(axis=0)
            hi = self.nodes.max(axis=0)
            # one cell of slack so neighbour probes never index out of range
            self._imin = lo - 1
            self._extents = hi - lo + 3
            strides = np.cumprod(
                np.concatenate([[1], self._extents[::-1][:-1]])
            )[::-1].astype(np.int64)
            self._strides = strides
            lut = np.full(int(np.prod(self._extents)), -1, dtype=np.int64)
            flat = (self.nodes - self._imin) @ strides
            lut[flat] = np.arange(len(self.nodes))
            self._lookup = lut

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def points(self) -> np.ndarray:
        """Physical coordinates of the band nodes."""
        return self.origin + self.dx * self.nodes

    def index_of(self, nodes: np.ndarray) -> np.ndarray:
        """Band indices of integer multi-indices; -1 where absent."""
        nodes = np.atleast_2d(np.asarray(nodes, dtype=np.int64))
        rel = nodes - self._imin
        inside = np.all((rel >= 0) & (rel < self._extents), axis=1)
        out = np.full(len(nodes), -1, dtype=np.int64)
        out[inside] = self._lookup[rel[inside] @ self._strides]
        return out


def _stencil_base_many(grid: BandedGrid, q: np.ndarray, p: int) -> np.ndarray:
    """Lower-corner multi-indices of the (p+1)^d interpolation cubes."""
    t = (np.atleast_2d(q) - grid.origin) / grid.dx
    if p % 2 == 1:
        base = np.floor(t).astype(np.int64) - (p - 1) // 2
    else:
        # even degree: center the stencil on the node nearest q
        base = np.rint(t).astype(np.int64) - p // 2
    return base


def interp_stencil_base(grid: BandedGrid, q) -> np.ndarray:
    """Lower corner of the interpolation cube around the point q.

    Raises OutOfBand if any node of the cube is missing from the band.
    """
    p = grid.interp_degree
    base = _stencil_base_many(grid, np.asarray(q, dtype=float), p)[0]
    offsets = np.stack(
        np.meshgrid(*([np.arange(p + 1)] * grid.d), indexing="ij"), axis=-1
    ).reshape(-1, grid.d)
    idx = grid.index_of(base + offsets)
    if np.any(idx < 0):
        raise OutOfBand(f"interpolation cube at {q} leaves the band")
    return base


def _closest_points(surface, pts, lam, lam_strict=None, chunk=200_000):
    """cp/dist/param for the subset of pts with dist <= lam.

    Uses the surface's coarse distance bound, when available, to avoid
    exact queries far from the band.  Ambiguous closest points are fatal
    only within lam_strict (defaults to lam): outer-shell nodes may sit
    near the medial axis and get a best-effort answer.
    """
    if lam_strict is None:
        lam_strict = lam
    m = len(pts)
    keep_mask = np.zeros(m, dtype=bool)
    cp_parts, dist_parts, par_parts = [], [], []
    for start in range(0, m, chunk):
        block = pts[start : start + chunk]
        if hasattr(surface, "coarse_distance"):
            ub = surface.coarse_distance(block)
            cand = ub <= lam + surface.coarse_slack
        else:
            cand = np.ones(len(block), dtype=bool)
        if not np.any(cand):
            continue
        cp, dist, par = surface.closest_point_many(block[cand], max_dist=lam_strict)
        sel = dist <= lam
        idx = start + np.nonzero(cand)[0][sel]
        keep_mask[idx] = True
        cp_parts.append(cp[sel])
        dist_parts.append(dist[sel])
        if par is not None:
            par_parts.append(par[sel])
    cp = np.concatenate(cp_parts) if cp_parts else np.empty((0, pts.shape[1]))
    dist = np.concatenate(dist_parts) if dist_parts else np.empty(0)
    par = np.concatenate(par_parts) if par_parts else None
    return keep_mask, cp, dist, par


def build_band(surface: Surface, dx: float, spec: StencilSpec) -> BandedGrid:
    """Construct the band of grid nodes within bandwidth of the surface.

    Scans the inflated bounding box of the surface with vectorized closest
    point queries, keeps nodes with dist <= bandwidth, and verifies stencil
    closure exhaustively: difference stencils close on the interior, and
    every interpolation cube around a closest point lies in the interior.
    """
    if dx <= 0:
        raise ValueError("dx must be positive")
    d = surface.dim
    p = spec.interp_degree
    lam_int = interp_bandwidth(d, p, dx)
    # tiny slack so nodes exactly at the outer edge survive float rounding
    lam = total_bandwidth(d, p, spec.diff_radius, dx) + 1e-9 * dx

    lo, hi = surface.bounding_box()
    pad = lam + 2 * dx
    imin = np.floor((lo - pad) / dx).astype(np.int64)
    imax = np.ceil((hi + pad) / dx).astype(np.int64)
    origin = imin.astype(float) * dx
    shape = imax - imin + 1

    ranges = [np.arange(n, dtype=np.int64) for n in shape]
    nodes_all = np.stack(
        np.meshgrid(*ranges, indexing="ij"), axis=-1
    ).reshape(-1, d)
    pts_all = origin + dx * nodes_all

    keep, cp, dist, param = _closest_points(surface, pts_all, lam, lam_strict=lam_int)
    nodes = nodes_all[keep]
    if len(nodes) == 0:
        raise BandNotClosed("band is empty; dx too large for the geometry")
    interior = dist <= lam_int

    grid = BandedGrid(
        dx=dx,
        d=d,
        origin=origin,
        nodes=nodes,
        cp=cp,
        dist=dist,
        param=param,
        interior=interior,
        bandwidth=lam,
        interp_bandwidth=lam_int,
        interp_degree=p,
        diff_radius=spec.diff_radius,
        surface=surface,
    )
    _check_closure(grid, spec)
    return grid


def _check_closure(grid: BandedGrid, spec: StencilSpec):
    nodes_int = grid.nodes[grid.interior]
    for axis in range(grid.d):
        for step in range(1, spec.diff_radius + 1):
            for sign in (-1, 1):
                nb = nodes_int.copy()
                nb[:, axis] += sign * step
                if np.any(grid.index_of(nb) < 0):
                    raise BandNotClosed(
                        "difference stencil leaves the band on an interior "
                        f"node (axis {axis})"
                    )
    p = grid.interp_degree
    base = _stencil_base_many(grid, grid.cp, p)
    offsets = np.stack(
        np.meshgrid(*([np.arange(p + 1)] * grid.d), indexing="ij"), axis=-1
    ).reshape(-1, grid.d)
    for off in offsets:
        idx = grid.index_of(base + off)
        if np.any(idx < 0):
            raise BandNotClosed("interpolation cube leaves the band")
        if not np.all(grid.interior[idx]):
            raise BandNotClosed("interpolation cube touches non-interior nodes")


def rectangle_grid(shape, dx: float, origin=None) -> BandedGrid:
    """Full rectangular grid posing as a band (all nodes interior).

    Used by tests that compare operators against hand-rolled loops on a
    plain box, free of banding effects.
    """
    shape = tuple(int(n) for n in shape)
    d = len(shape)
    origin = np.zeros(d) if origin is None else np.asarray(origin, dtype=float)
    ranges = [np.arange(n, dtype=np.int64) for n in shape]
    nodes = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    pts = origin + dx * nodes
    interior = np.all(
        (nodes >= 1) & (nodes <= np.array(shape) - 2), axis=1
    )
    return BandedGrid(
        dx=dx,
        d=d,
        origin=origin,
        nodes=nodes,
        cp=pts.copy(),
        dist=np.zeros(len(nodes)),
        param=None,
        interior=interior,
        bandwidth=0.0,
        interp_bandwidth=0.0,
        interp_degree=1,
        diff_radius=1,
        surface=None,
    )


def write_band_csv(grid: BandedGrid, path):
    """Dump the band: linear index, multi-index, coordinates, cp, dist."""
    axes = "xyz"[: grid.d]
    cols = (
        ["linear_index"]
        + list("ijk"[: grid.d])
        + list(axes)
        + [f"cp{a}" for a in axes]
        + ["dist"]
    )
    pts = grid.points
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for n in range(grid.n_nodes):
            row = (
                [str(n)]
                + [str(v) for v in grid.nodes[n]]
                + [f"{v:.17g}" for v in pts[n]]
                + [f"{v:.17g}" for v in grid.cp[n]]
                + [f"{grid.dist[n]:.17g}"]
            )
            fh.write(",".join(row) + "\n")
