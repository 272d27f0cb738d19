"""Closest point functions for analytic surfaces and triangle meshes.

Every surface provides a retraction ``cp`` mapping points of a tubular
neighbourhood to their Euclidean-nearest surface point, plus (where the
surface is parameterized) parameters and exact mean curvature used as
oracles by the error-evaluation and curvature tests.

Analytic curves are parameterized by ``s`` in ``[0, period)`` (default
period ``2*pi``); the sphere by longitude/latitude ``(theta, phi)`` in
``(-pi, pi] x [-pi/2, pi/2]``.
"""

from __future__ import annotations

import dataclasses
import math
import os
from typing import Callable

import numpy as np

from .errors import (
    AmbiguousClosestPoint,
    DegenerateTriangle,
    EmptyMesh,
    NotWatertight,
    UnsupportedSurface,
)

__all__ = [
    "CpResult",
    "Surface",
    "Circle",
    "Sphere",
    "ParametricCurve",
    "Ellipse",
    "snowflake_curve",
    "TriangleMesh",
    "closest_point",
    "closest_point_mesh",
    "sample_surface",
    "exact_mean_curvature",
    "load_mesh",
    "load_off",
    "load_obj",
    "write_off",
    "octahedron_mesh",
    "cube_mesh",
    "sphere_mesh",
    "torus_mesh",
    "bundled_torus_path",
]

# Relative gap below which two competing closest-point candidates are
# declared ambiguous (the query sits on the medial axis).
AMBIGUITY_RTOL = 1e-9


@dataclasses.dataclass(frozen=True)
class CpResult:
    """Result of a closest point query.

    Attributes:
        cp: on-surface closest point, shape (d,).
        dist: Euclidean distance from the query to ``cp``.
        param: surface parameter of ``cp`` (shape (k,)), or None when the
            surface is not parameterized (triangle meshes).
    """

    cp: np.ndarray
    dist: float
    param: np.ndarray | None = None


class Surface:
    """Base class: an immutable, closed surface embedded in R^d."""

    dim: int  # embedding dimension d
    surface_dim: int  # intrinsic dimension k < d

    def closest_point_many(self, x: np.ndarray):
        """Vectorized closest point query.

        Args:
            x: query points, shape (m, d).

        Returns:
            (cp, dist, param): arrays of shape (m, d), (m,), and
            (m, k) or None.
        """
        raise NotImplementedError

    def bounding_box(self):
        """Axis-aligned (lo, hi) box containing the surface."""
        raise NotImplementedError

    def sample(self, n: int):
        """Return ``(points, params)`` of roughly n on-surface samples."""
        raise NotImplementedError


class Circle(Surface):
    """Circle of given center and radius in R^2, parameterized by angle."""

    dim = 2
    surface_dim = 1

    def __init__(self, center=(0.0, 0.0), radius=1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def closest_point_many(self, x, max_dist=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rel = x - self.center
        rho = np.linalg.norm(rel, axis=1)
        central = rho < AMBIGUITY_RTOL * (1.0 + self.radius)
        if np.any(central):
            # equidistant from the whole circle; fatal only when the caller
            # needs a trustworthy answer at that distance
            if max_dist is None or self.radius <= max_dist:
                raise AmbiguousClosestPoint(
                    "query at circle center: all surface points equidistant"
                )
            rel = rel.copy()
            rel[central, 0] = 1.0  # arbitrary but deterministic direction
            rho = np.where(central, 1.0, rho)
            rho_true = np.linalg.norm(x - self.center, axis=1)
        else:
            rho_true = rho
        cp = self.center + self.radius * (rel / rho[:, None])
        dist = np.abs(rho_true - self.radius)
        theta = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2.0 * np.pi)
        return cp, dist, theta[:, None]

    coarse_slack = 0.0

    def coarse_distance(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.abs(
            np.linalg.norm(x - self.center, axis=1) - self.radius
        )

    def bounding_box(self):
        r = self.radius
        return self.center - r, self.center + r

    def sample(self, n):
        theta = 2.0 * np.pi * np.arange(n) / n
        pts = self.center + self.radius * np.column_stack(
            [np.cos(theta), np.sin(theta)]
        )
        return pts, theta[:, None]

    def mean_curvature(self, param=None):
        return 1.0 / self.radius


class Sphere(Surface):
    """Sphere in R^3; parameters are (theta, phi) = (longitude, latitude)."""

    dim = 3
    surface_dim = 2

    def __init__(self, center=(0.0, 0.0, 0.0), radius=1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def closest_point_many(self, x, max_dist=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rel = x - self.center
        rho = np.linalg.norm(rel, axis=1)
        central = rho < AMBIGUITY_RTOL * (1.0 + self.radius)
        if np.any(central):
            if max_dist is None or self.radius <= max_dist:
                raise AmbiguousClosestPoint(
                    "query at sphere center: all surface points equidistant"
                )
            rel = rel.copy()
            rel[central, 0] = 1.0
            rho_true = np.linalg.norm(x - self.center, axis=1)
            rho = np.where(central, 1.0, rho)
        else:
            rho_true = rho
        cp = self.center + self.radius * (rel / rho[:, None])
        dist = np.abs(rho_true - self.radius)
        u = rel / rho[:, None]
        theta = np.arctan2(u[:, 1], u[:, 0])
        phi = np.arcsin(np.clip(u[:, 2], -1.0, 1.0))
        return cp, dist, np.column_stack([theta, phi])

    coarse_slack = 0.0

    def coarse_distance(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.abs(
            np.linalg.norm(x - self.center, axis=1) - self.radius
        )

    def bounding_box(self):
        r = self.radius
        return self.center - r, self.center + r

    def sample(self, n):
        # m x m offset lat-long grid; the latitude offset avoids duplicated
        # pole points.
        m = int(math.ceil(math.sqrt(n)))
        theta = -np.pi + 2.0 * np.pi * (np.arange(m) + 1) / m
        phi = -np.pi / 2 + np.pi * (np.arange(m) + 0.5) / m
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        tt, pp = tt.ravel(), pp.ravel()
        pts = self.center + self.radius * np.column_stack(
            [np.cos(tt) * np.cos(pp), np.sin(tt) * np.cos(pp), np.sin(pp)]
        )
        return pts, np.column_stack([tt, pp])

    def mean_curvature(self, param=None):
        # sum of the two principal curvatures 1/R + 1/R
        return 2.0 / self.radius

    def param_to_point(self, theta, phi):
        return self.center + self.radius * np.column_stack(
            [
                np.cos(theta) * np.cos(phi),
                np.sin(theta) * np.cos(phi),
                np.sin(phi),
            ]
        )


class ParametricCurve(Surface):
    """Closed curve sigma: [0, period) -> R^2.

    The closest point query brackets the global minimum of |x - sigma(s)|
    with a dense sample of the parameter, refines by golden-section search
    on the squared distance, and polishes with Newton iterations on
    g(s) = (x - sigma(s)) . sigma'(s) = 0.  If the two best separated local
    minima are equidistant beyond tolerance the query is on the medial axis
    and AmbiguousClosestPoint is raised.
    """

    dim = 2
    surface_dim = 1

    N_BRACKET = 1024

    def __init__(
        self,
        sigma: Callable[[np.ndarray], np.ndarray],
        dsigma: Callable[[np.ndarray], np.ndarray] | None = None,
        d2sigma: Callable[[np.ndarray], np.ndarray] | None = None,
        period: float = 2.0 * np.pi,
    ):
        self._sigma = sigma
        self.period = float(period)
        h = 1e-6 * self.period / (2.0 * np.pi)
        if dsigma is None:
            dsigma = lambda s: (sigma(s + h) - sigma(s - h)) / (2.0 * h)
        self._dsigma = dsigma
        if d2sigma is None:
            hh = 1e-4 * self.period / (2.0 * np.pi)
            d2sigma = lambda s: (
                sigma(s + hh) - 2.0 * sigma(s) + sigma(s - hh)
            ) / (hh * hh)
        self._d2sigma = d2sigma
        self._s_grid = self.period * np.arange(self.N_BRACKET) / self.N_BRACKET
        self._p_grid = self.sigma(self._s_grid)
        chords = np.linalg.norm(
            np.roll(self._p_grid, -1, axis=0) - self._p_grid, axis=1
        )
        # coarse_distance overestimates by at most the largest chord
        self.coarse_slack = float(chords.max())

    def sigma(self, s):
        s = np.asarray(s, dtype=float)
        out = np.asarray(self._sigma(s), dtype=float)
        if out.shape[-1] != 2:
            out = np.moveaxis(out, 0, -1)
        return out

    def dsigma(self, s):
        s = np.asarray(s, dtype=float)
        out = np.asarray(self._dsigma(s), dtype=float)
        if out.shape[-1] != 2:
            out = np.moveaxis(out, 0, -1)
        return out

    def d2sigma(self, s):
        s = np.asarray(s, dtype=float)
        out = np.asarray(self._d2sigma(s), dtype=float)
        if out.shape[-1] != 2:
            out = np.moveaxis(out, 0, -1)
        return out

    def coarse_distance(self, x):
        """Cheap upper bound on the distance to the curve (for banding)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(len(x))
        pg2 = np.sum(self._p_grid * self._p_grid, axis=1)
        for start in range(0, len(x), 4096):
            xs = x[start : start + 4096]
            d2 = (
                np.sum(xs * xs, axis=1)[:, None]
                - 2.0 * xs @ self._p_grid.T
                + pg2[None, :]
            )
            out[start : start + 4096] = np.sqrt(np.maximum(d2.min(axis=1), 0.0))
        return out

    # -- closest point machinery ------------------------------------------

    def _refine(self, x, lo, hi):
        """Golden-section on |x - sigma(s)|^2 over [lo, hi], Newton polish."""
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo.copy(), hi.copy()
        for _ in range(60):
            c = b - invphi * (b - a)
            d = a + invphi * (b - a)
            fc = np.sum((x - self.sigma(c)) ** 2, axis=-1)
            fd = np.sum((x - self.sigma(d)) ** 2, axis=-1)
            left = fc < fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
        s = 0.5 * (a + b)
        # Newton on g(s) = (x - sigma(s)) . sigma'(s)
        for _ in range(4):
            sig = self.sigma(s)
            dsig = self.dsigma(s)
            d2sig = self.d2sigma(s)
            r = x - sig
            g = np.sum(r * dsig, axis=-1)
            gp = np.sum(r * d2sig, axis=-1) - np.sum(dsig * dsig, axis=-1)
            step = np.where(np.abs(gp) > 1e-300, g / gp, 0.0)
            step = np.clip(step, lo - s, hi - s)
            s = s - step
        return s

    def closest_point_many(self, x, max_dist=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        m = x.shape[0]
        cp = np.empty_like(x)
        dist = np.empty(m)
        param = np.empty((m, 1))
        ds = self.period / self.N_BRACKET
        for start in range(0, m, 4096):
            sl = slice(start, min(start + 4096, m))
            xs = x[sl]
            d2 = (
                np.sum(xs * xs, axis=1)[:, None]
                - 2.0 * xs @ self._p_grid.T
                + np.sum(self._p_grid * self._p_grid, axis=1)[None, :]
            )
            k = np.argmin(d2, axis=1)
            lo = self._s_grid[k] - ds
            hi = self._s_grid[k] + ds
            s = self._refine(xs, lo, hi)
            sig = self.sigma(s)
            dbest = np.linalg.norm(xs - sig, axis=1)
            self._check_ambiguity(xs, d2, k, dbest, max_dist)
            cp[sl] = sig
            dist[sl] = dbest
            param[sl, 0] = np.mod(s, self.period)
        return cp, dist, param

    def _check_ambiguity(self, xs, d2, kbest, dbest, max_dist=None):
        """Refine competing separated local minima; raise if equidistant."""
        n = self.N_BRACKET
        left = np.roll(d2, 1, axis=1)
        right = np.roll(d2, -1, axis=1)
        is_min = (d2 <= left) & (d2 <= right)
        # mask out the winning bracket and its immediate neighbourhood
        idx = np.arange(n)[None, :]
        sep = np.minimum(
            np.abs(idx - kbest[:, None]), n - np.abs(idx - kbest[:, None])
        )
        competing = is_min & (sep > 2)
        d2m = np.where(competing, d2, np.inf)
        k2 = np.argmin(d2m, axis=1)
        d2nd = np.sqrt(d2m[np.arange(len(k2)), k2])
        ds = self.period / n
        # generous coarse screen; refine only flagged queries
        flagged = d2nd - dbest < 1e-5 * (1.0 + dbest) + ds * ds
        if max_dist is not None:
            # callers outside the declared band get best-effort results
            flagged &= dbest <= max_dist
        suspect = np.nonzero(flagged)[0]
        for i in suspect:
            lo = np.array([self._s_grid[k2[i]] - ds])
            hi = np.array([self._s_grid[k2[i]] + ds])
            s2 = self._refine(xs[i][None, :], lo, hi)
            p2 = self.sigma(s2)[0]
            dd = float(np.linalg.norm(xs[i] - p2))
            p1 = self.sigma(
                np.array([self._s_grid[kbest[i]]])
            )  # coarse; dbest already refined
            if abs(dd - dbest[i]) < AMBIGUITY_RTOL * (1.0 + dbest[i]):
                raise AmbiguousClosestPoint(
                    f"point {xs[i]} equidistant to separated curve points "
                    f"(d = {dbest[i]:.3e})"
                )

    def bounding_box(self):
        lo = self._p_grid.min(axis=0)
        hi = self._p_grid.max(axis=0)
        pad = 0.01 * max(hi - lo)
        return lo - pad, hi + pad

    def sample(self, n):
        s = self.period * np.arange(n) / n
        return self.sigma(s), s[:, None]

    def mean_curvature(self, param):
        s = np.asarray(param, dtype=float).reshape(-1)
        d1 = self.dsigma(s)
        d2 = self.d2sigma(s)
        cross = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
        speed = np.linalg.norm(d1, axis=-1)
        kappa = np.abs(cross) / speed**3
        return kappa if kappa.size > 1 else float(kappa[0])


class Ellipse(ParametricCurve):
    """Axis-aligned ellipse (x/a)^2 + (y/b)^2 = 1 with exact curvature."""

    def __init__(self, a=2.0, b=1.0):
        if a <= 0 or b <= 0:
            raise ValueError("semi-axes must be positive")
        self.a, self.b = float(a), float(b)
        super().__init__(
            sigma=lambda s: np.stack(
                [self.a * np.cos(s), self.b * np.sin(s)], axis=-1
            ),
            dsigma=lambda s: np.stack(
                [-self.a * np.sin(s), self.b * np.cos(s)], axis=-1
            ),
            d2sigma=lambda s: np.stack(
                [-self.a * np.cos(s), -self.b * np.sin(s)], axis=-1
            ),
        )

    def mean_curvature(self, param):
        s = np.asarray(param, dtype=float).reshape(-1)
        a, b = self.a, self.b
        kappa = a * b / (a * a * np.sin(s) ** 2 + b * b * np.cos(s) ** 2) ** 1.5
        return kappa if kappa.size > 1 else float(kappa[0])


def snowflake_curve():
    """Six-lobed flower curve r(s) = 1 + cos(6 s)/3."""

    def sigma(s):
        r = 1.0 + np.cos(6.0 * s) / 3.0
        return np.stack([r * np.cos(s), r * np.sin(s)], axis=-1)

    def dsigma(s):
        r = 1.0 + np.cos(6.0 * s) / 3.0
        rp = -2.0 * np.sin(6.0 * s)
        return np.stack(
            [rp * np.cos(s) - r * np.sin(s), rp * np.sin(s) + r * np.cos(s)],
            axis=-1,
        )

    def d2sigma(s):
        r = 1.0 + np.cos(6.0 * s) / 3.0
        rp = -2.0 * np.sin(6.0 * s)
        rpp = -12.0 * np.cos(6.0 * s)
        return np.stack(
            [
                rpp * np.cos(s) - 2.0 * rp * np.sin(s) - r * np.cos(s),
                rpp * np.sin(s) + 2.0 * rp * np.cos(s) - r * np.sin(s),
            ],
            axis=-1,
        )

    return ParametricCurve(sigma, dsigma, d2sigma)


# ---------------------------------------------------------------------------
# Triangle meshes
# ---------------------------------------------------------------------------


def _closest_point_on_triangle(a, b, c, p):
    """Exact closest point on triangle (a, b, c) to p (Ericson's algorithm).

    Returns (point, squared distance).  Region classification handles the
    face, three edges and three vertices exactly.
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab @ ap
    d2 = ac @ ap
    if d1 <= 0.0 and d2 <= 0.0:
        q = a
    else:
        bp = p - b
        d3 = ab @ bp
        d4 = ac @ bp
        if d3 >= 0.0 and d4 <= d3:
            q = b
        else:
            vc = d1 * d4 - d3 * d2
            if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
                q = a + (d1 / (d1 - d3)) * ab
            else:
                cp_ = p - c
                d5 = ab @ cp_
                d6 = ac @ cp_
                if d6 >= 0.0 and d5 <= d6:
                    q = c
                else:
                    vb = d5 * d2 - d1 * d6
                    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
                        q = a + (d2 / (d2 - d6)) * ac
                    else:
                        va = d3 * d6 - d5 * d4
                        if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
                            q = b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (
                                c - b
                            )
                        else:
                            denom = 1.0 / (va + vb + vc)
                            q = a + ab * (vb * denom) + ac * (vc * denom)
    diff = p - q
    return q, diff @ diff


class _AabbTree:
    """Static axis-aligned bounding box tree over triangles.

    Median split on the longest axis of the triangle centroids; leaves hold
    up to 8 triangles.  Queries prune with conservative box distances so the
    winning triangle is bit-identical to an exhaustive scan.
    """

    LEAF_SIZE = 8

    def __init__(self, tri_lo, tri_hi, centroids):
        order = np.arange(len(centroids))
        self.boxes_lo = []
        self.boxes_hi = []
        self.children = []  # (left, right) or (-1, -1) for leaves
        self.leaf_tris = []  # triangle index arrays per node (leaves only)
        self._tri_lo, self._tri_hi = tri_lo, tri_hi
        self._build(order, centroids)

    def _build(self, order, centroids):
        node = len(self.boxes_lo)
        self.boxes_lo.append(self._tri_lo[order].min(axis=0))
        self.boxes_hi.append(self._tri_hi[order].max(axis=0))
        self.children.append((-1, -1))
        self.leaf_tris.append(None)
        if len(order) <= self.LEAF_SIZE:
            self.leaf_tris[node] = np.sort(order)
            return node
        cen = centroids[order]
        axis = int(np.argmax(cen.max(axis=0) - cen.min(axis=0)))
        half = len(order) // 2
        part = order[np.argpartition(cen[:, axis], half)]
        left = self._build(part[:half], centroids)
        right = self._build(part[half:], centroids)
        self.children[node] = (left, right)
        return node

    def _box_dist2(self, node, p):
        d = np.maximum(
            np.maximum(self.boxes_lo[node] - p, 0.0), p - self.boxes_hi[node]
        )
        return d @ d

    def candidates(self, p, tri_dist2):
        """Indices of all triangles whose distance could tie the minimum."""
        best = np.inf
        out = []
        stack = [0]
        while stack:
            node = stack.pop()
            if self._box_dist2(node, p) > best * (1.0 + 1e-12):
                continue
            left, right = self.children[node]
            if left < 0:
                for t in self.leaf_tris[node]:
                    d2 = tri_dist2(t, p)
                    out.append(t)
                    if d2 < best:
                        best = d2
                continue
            stack.append(right)
            stack.append(left)
        return out


class TriangleMesh(Surface):
    """Watertight triangle mesh in R^3 with an exact closest point query."""

    dim = 3
    surface_dim = 2

    def __init__(self, vertices, faces):
        vertices = np.asarray(vertices, dtype=float)
        faces = np.asarray(faces, dtype=np.int64)
        if faces.size == 0:
            raise EmptyMesh("mesh has no faces")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError("faces must be (F, 3) vertex indices")
        a = vertices[faces[:, 0]]
        b = vertices[faces[:, 1]]
        c = vertices[faces[:, 2]]
        areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        if np.any(areas <= 0.0):
            bad = int(np.argmin(areas))
            raise DegenerateTriangle(f"face {bad} has zero area")
        edges = np.sort(
            np.concatenate(
                [faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]]
            ),
            axis=1,
        )
        _, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts != 2):
            raise NotWatertight("every edge must be shared by exactly 2 faces")
        self.vertices = vertices
        self.faces = faces
        self._tri = vertices[faces]  # (F, 3, 3)
        tri_lo = self._tri.min(axis=1)
        tri_hi = self._tri.max(axis=1)
        self._tree = _AabbTree(tri_lo, tri_hi, self._tri.mean(axis=1))
        edge_vecs = np.concatenate(
            [b - a, c - b, a - c]
        )
        self.coarse_slack = float(np.linalg.norm(edge_vecs, axis=1).max())
        self._vertex_tree = None

    def coarse_distance(self, x):
        """Nearest-vertex distance: upper bound on the mesh distance."""
        if self._vertex_tree is None:
            from scipy.spatial import cKDTree

            self._vertex_tree = cKDTree(self.vertices)
        d, _ = self._vertex_tree.query(np.atleast_2d(np.asarray(x, float)))
        return d

    def _tri_dist2(self, t, p):
        tri = self._tri[t]
        _, d2 = _closest_point_on_triangle(tri[0], tri[1], tri[2], p)
        return d2

    def closest_point_single(self, p):
        p = np.asarray(p, dtype=float)
        cand = self._tree.candidates(p, self._tri_dist2)
        cand.sort()
        best_d2 = np.inf
        best_q = None
        for t in cand:
            tri = self._tri[t]
            q, d2 = _closest_point_on_triangle(tri[0], tri[1], tri[2], p)
            if d2 < best_d2:
                best_d2 = d2
                best_q = q
        return best_q, math.sqrt(best_d2)

    def closest_point_exhaustive(self, p):
        """Brute-force scan over every triangle; oracle for the tree query."""
        p = np.asarray(p, dtype=float)
        best_d2 = np.inf
        best_q = None
        for t in range(len(self.faces)):
            tri = self._tri[t]
            q, d2 = _closest_point_on_triangle(tri[0], tri[1], tri[2], p)
            if d2 < best_d2:
                best_d2 = d2
                best_q = q
        return best_q, math.sqrt(best_d2)

    def closest_point_many(self, x, max_dist=None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cp = np.empty_like(x)
        dist = np.empty(x.shape[0])
        for i, p in enumerate(x):
            q, d = self.closest_point_single(p)
            cp[i] = q
            dist[i] = d
        return cp, dist, None

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def sample(self, n):
        return self.vertices.copy(), None


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def closest_point(surface: Surface, x) -> CpResult:
    """Euclidean-nearest surface point of a single query point."""
    cp, dist, param = surface.closest_point_many(np.asarray(x, dtype=float))
    return CpResult(
        cp=cp[0],
        dist=float(dist[0]),
        param=None if param is None else param[0],
    )


def closest_point_mesh(mesh: TriangleMesh, x) -> CpResult:
    """Closest point on a triangle mesh (spatial-index accelerated)."""
    if not isinstance(mesh, TriangleMesh):
        raise UnsupportedSurface("closest_point_mesh requires a TriangleMesh")
    return closest_point(mesh, x)


def sample_surface(surface: Surface, n: int):
    """On-surface sample points with parameters (None for meshes)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return surface.sample(n)


def exact_mean_curvature(surface: Surface, y) -> float:
    """Exact (unsigned) mean curvature at the surface point y.

    Circle of radius R gives 1/R, sphere 2/R, parameterized curves
    |sigma' x sigma''| / |sigma'|^3 at the parameter of y.
    """
    if isinstance(surface, TriangleMesh):
        raise UnsupportedSurface("no exact curvature for triangle meshes")
    res = closest_point(surface, y)
    if res.dist > 1e-8 * (1.0 + float(np.linalg.norm(y))):
        raise ValueError(f"point {y} is not on the surface (dist={res.dist:g})")
    if isinstance(surface, (Circle, Sphere)):
        return surface.mean_curvature()
    return float(surface.mean_curvature(res.param))


# ---------------------------------------------------------------------------
# Mesh file I/O (ASCII OFF and OBJ, triangles only)
# ---------------------------------------------------------------------------


def load_off(path) -> TriangleMesh:
    with open(path) as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ValueError(f"{path}: not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos : pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise ValueError(f"{path}: non-triangle face with {cnt} vertices")
        faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
        pos += 1 + cnt
    return TriangleMesh(verts, np.array(faces, dtype=np.int64))


def load_obj(path) -> TriangleMesh:
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise ValueError(
                        f"{path}: non-triangle face with {len(parts) - 1} vertices"
                    )
                # indices may carry /texture/normal suffixes; OBJ is one-based
                faces.append(
                    [int(p.split("/", 1)[0]) - 1 for p in parts[1:4]]
                )
    return TriangleMesh(
        np.array(verts, dtype=float), np.array(faces, dtype=np.int64)
    )


def load_mesh(path) -> TriangleMesh:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".off":
        return load_off(path)
    if ext == ".obj":
        return load_obj(path)
    raise ValueError(f"unsupported mesh format: {ext!r} (expected .off/.obj)")


def write_off(path, mesh: TriangleMesh):
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(mesh.vertices)} {len(mesh.faces)} 0\n")
        for v in mesh.vertices:
            fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


# ---------------------------------------------------------------------------
# Built-in meshes
# ---------------------------------------------------------------------------


def octahedron_mesh(radius=1.0) -> TriangleMesh:
    v = radius * np.array(
        [
            [1, 0, 0],
            [-1, 0, 0],
            [0, 1, 0],
            [0, -1, 0],
            [0, 0, 1],
            [0, 0, -1],
        ],
        dtype=float,
    )
    f = np.array(
        [
            [0, 2, 4],
            [2, 1, 4],
            [1, 3, 4],
            [3, 0, 4],
            [2, 0, 5],
            [1, 2, 5],
            [3, 1, 5],
            [0, 3, 5],
        ],
        dtype=np.int64,
    )
    return TriangleMesh(v, f)


def cube_mesh(half=0.5) -> TriangleMesh:
    """Surface of the axis-aligned cube [-half, half]^3 (12 triangles)."""
    corners = np.array(
        [[x, y, z] for x in (-half, half) for y in (-half, half) for z in (-half, half)]
    )
    # each quad split into two triangles, outward orientation
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    faces = []
    for a, b, c, d in quads:
        faces.append([a, b, c])
        faces.append([a, c, d])
    return TriangleMesh(corners, np.array(faces, dtype=np.int64))


def sphere_mesh(subdivisions=3, radius=1.0) -> TriangleMesh:
    """Octahedron subdivided and projected onto the sphere."""
    mesh = octahedron_mesh()
    verts = mesh.vertices
    faces = mesh.faces
    for _ in range(subdivisions):
        edge_mid = {}
        new_verts = list(verts)

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in edge_mid:
                m = 0.5 * (verts[i] + verts[j])
                m /= np.linalg.norm(m)
                edge_mid[key] = len(new_verts)
                new_verts.append(m)
            return edge_mid[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces.extend(
                [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
            )
        verts = np.array(new_verts)
        verts /= np.linalg.norm(verts, axis=1)[:, None]
        faces = np.array(new_faces, dtype=np.int64)
    return TriangleMesh(radius * verts, faces)


def torus_mesh(R=1.0, r=0.4, nu=48, nv=24) -> TriangleMesh:
    """Regular torus triangulation; stand-in for higher-genus demo meshes."""
    iu, iv = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    u = 2.0 * np.pi * iu / nu
    v = 2.0 * np.pi * iv / nv
    x = (R + r * np.cos(v)) * np.cos(u)
    y = (R + r * np.cos(v)) * np.sin(u)
    z = r * np.sin(v)
    verts = np.column_stack([x.ravel(), y.ravel(), z.ravel()])
    faces = []
    for i in range(nu):
        for j in range(nv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            faces.append([a, b, c])
            faces.append([a, c, d])
    return TriangleMesh(verts, np.array(faces, dtype=np.int64))


def bundled_torus_path():
    """Path of the torus mesh shipped with the package."""
    return os.path.join(os.path.dirname(__file__), "data", "torus.off")
