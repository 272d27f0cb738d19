"""Concrete test problems: initial data, exact solutions, error evaluation.

Closed-form solutions for the circle problems, a Legendre-series solution
for diffusion of the standard latitude profile on the sphere, the
Gray-Scott reaction-diffusion system, curvature-dependent diffusion on
closed curves, and an independent 1D parameter-space reference solver used
as the oracle for the curve problems.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import geometry
from .assembly import (
    PenaltyConfig,
    SemiDiscreteSystem,
    biharmonic_operator,
    curvature_field,
    diffusivity_from_curvature,
    heat_operator,
    varcoef_operator,
)
from .band import BandedGrid, StencilSpec, build_band
from .operators import extension_matrix, interpolation_matrix, laplacian

__all__ = [
    "ProblemSpec",
    "ErrorReport",
    "exact_heat_circle",
    "exact_heat_sphere",
    "exact_biharmonic_circle",
    "restrict_and_error",
    "gray_scott_rhs",
    "gray_scott_system",
    "curvature_diffusion_problem",
    "reference_curve_solver",
    "make_problem",
    "PROBLEM_NAMES",
]


@dataclasses.dataclass
class ProblemSpec:
    """A named problem: geometry, penalty policy, initial data, exact solution.

    initial maps a band to the initial vector; exact (when known) maps
    (t, param) to surface values in parameter space.
    """

    name: str
    surface: geometry.Surface
    gamma: PenaltyConfig
    p: int
    initial: Callable[[BandedGrid], np.ndarray]
    exact: Callable | None = None
    build: Callable[[BandedGrid], SemiDiscreteSystem] | None = None


@dataclasses.dataclass(frozen=True)
class ErrorReport:
    """Max-norm error of a band solution restricted to the surface."""

    dx: float
    dt: float
    p: int
    gamma: float
    max_err: float
    samples: int

    def __post_init__(self):
        if self.max_err < 0:
            raise ValueError("max_err must be nonnegative")


def exact_heat_circle(t, theta):
    """Diffusion of cos(th) + cos(3 th) on the unit circle."""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.exp(-t) * np.cos(theta) + np.exp(-9.0 * t) * np.cos(3.0 * theta)


@functools.lru_cache(maxsize=1)
def _sphere_legendre_coef(n_modes: int = 80, quad: int = 200):
    """Legendre coefficients of cos(latitude + 1/2) in z = sin(latitude)."""
    z, w = np.polynomial.legendre.leggauss(quad)
    f = np.cos(np.arcsin(z) + 0.5)
    coef = np.empty(n_modes)
    for l in range(n_modes):
        basis = np.polynomial.legendre.Legendre.basis(l)(z)
        coef[l] = np.sum(w * f * basis) * (2 * l + 1) / 2.0
    return coef


def exact_heat_sphere(t, theta, phi):
    """Diffusion of cos(latitude + 1/2) on the unit sphere.

    The initial profile is not a single spherical harmonic, so the solution
    is evaluated by evolving its Legendre series in z = sin(phi); the series
    is truncated where the mode decay makes further terms negligible.
    Independent of the longitude theta.
    """
    t = float(t)
    phi = np.asarray(phi, dtype=float)
    if t == 0.0:
        return np.cos(phi + 0.5) + 0.0 * np.asarray(theta, dtype=float)
    if t < 0:
        raise ValueError("t must be nonnegative")
    coef = _sphere_legendre_coef()
    z = np.sin(phi)
    out = np.zeros_like(z)
    for l, c in enumerate(coef):
        decay = math.exp(-l * (l + 1) * t)
        if decay < 1e-300:
            break
        out += c * decay * np.polynomial.legendre.Legendre.basis(l)(z)
    return out + 0.0 * np.asarray(theta, dtype=float)


def exact_biharmonic_circle(t, theta):
    """Fourth-order decay of cos(th) + cos(3 th) on the unit circle."""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return np.exp(-t) * np.cos(theta) + np.exp(-81.0 * t) * np.cos(3.0 * theta)


def default_samples(surface: geometry.Surface, dx: float) -> int:
    """Sample count making the surface max-norm insensitive to sampling."""
    per_axis = int(10 * math.ceil(2.0 * math.pi / dx))
    if surface.surface_dim == 1:
        return per_axis
    # lat-long grid of spacing comparable to dx
    m = int(math.ceil(2.0 * math.pi / dx))
    return m * m


def restrict_and_error(
    grid: BandedGrid, v: np.ndarray, exact, t: float, n_samples: int | None = None,
    dt: float = float("nan"),
) -> ErrorReport:
    """Interpolate the band solution at surface samples, compare to exact.

    exact is a parameter-space function exact(t, param) with param shaped
    (n, k) as produced by the surface's sample().
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("band solution contains non-finite values")
    surface = grid.surface
    if n_samples is None:
        n_samples = default_samples(surface, grid.dx)
    pts, par = surface.sample(n_samples)
    I = interpolation_matrix(grid, pts)
    approx = I @ v
    if par.shape[1] == 1:
        ex = exact(t, par[:, 0])
    else:
        ex = exact(t, par[:, 0], par[:, 1])
    err = float(np.abs(approx - ex).max())
    return ErrorReport(
        dx=grid.dx, dt=dt, p=grid.interp_degree, gamma=float("nan"),
        max_err=err, samples=len(pts),
    )


# ---------------------------------------------------------------------------
# Gray-Scott reaction-diffusion
# ---------------------------------------------------------------------------

GS_F = 0.054
GS_K = 0.063


def gray_scott_rhs(u, v, F, k, M_u, M_v):
    """Full right-hand side of the two-species system.

    du = M_u u - u v^2 + F (1 - u)
    dv = M_v v + u v^2 - (F + k) v
    with M_u, M_v the assembled diffusion+penalty operators.
    """
    uv2 = u * v * v
    du = M_u @ u - uv2 + F * (1.0 - u)
    dv = M_v @ v + uv2 - (F + k) * v
    return du, dv


def gray_scott_system(
    grid: BandedGrid, nu_u, nu_v, F: float = GS_F, k: float = GS_K,
    gamma=None, p: int | None = None,
) -> SemiDiscreteSystem:
    """Stacked 2N system for (u, v) with scalar or per-node diffusivities.

    The diffusivity scales only the surface Laplacian; the penalty term
    keeps its own strength gamma in both equations.
    """
    if gamma is None:
        gamma = PenaltyConfig.recommended(grid.d, grid.dx)
    g = gamma.gamma if isinstance(gamma, PenaltyConfig) else float(gamma)
    E = extension_matrix(grid, p)
    L = laplacian(grid)
    EL = (E @ L).tocsr()
    pen = (g * (sp.eye_array(grid.n_nodes, format="csr") - E)).tocsr()

    def scaled(nu):
        nu = np.asarray(nu, dtype=float)
        if nu.ndim == 0:
            return (float(nu) * EL - pen).tocsr()
        return (sp.diags_array(nu, format="csr") @ EL - pen).tocsr()

    M_u = scaled(nu_u)
    M_v = scaled(nu_v)
    linear = sp.block_diag([M_u, M_v], format="csr")
    n = grid.n_nodes

    def nonlinear(t, w):
        u, v = w[:n], w[n:]
        uv2 = u * v * v
        return np.concatenate([-uv2 + F * (1.0 - u), uv2 - (F + k) * v])

    return SemiDiscreteSystem(linear, nonlinear=nonlinear)


def gray_scott_initial(grid: BandedGrid, seed: int = 0, amplitude: float = 0.05):
    """Homogeneous state (1, 0) with a seeded random perturbation patch.

    The patch is the set of nodes whose closest point lies within 1/4 of
    the surface diameter of a fixed anchor (the first sample point).
    """
    rng = np.random.default_rng(seed)
    n = grid.n_nodes
    u = np.ones(n)
    v = np.zeros(n)
    anchor, _ = grid.surface.sample(8)
    lo, hi = grid.surface.bounding_box()
    radius = 0.25 * float(np.linalg.norm(hi - lo))
    patch = np.linalg.norm(grid.cp - anchor[0], axis=1) < radius
    u[patch] += amplitude * rng.uniform(-1.0, 1.0, size=int(patch.sum()))
    v[patch] += amplitude * rng.uniform(0.0, 1.0, size=int(patch.sum()))
    return np.concatenate([u, v])


# ---------------------------------------------------------------------------
# Curvature-dependent diffusion on closed curves
# ---------------------------------------------------------------------------


def curvature_diffusion_problem(
    surface: geometry.Surface, dx: float, p: int = 3, gamma=None,
):
    """Band, semi-discrete system, and initial vector for u_t = div(a grad u).

    The diffusivity a = 1/(1 + |kappa|) is computed from the discrete
    curvature field of the band; the initial condition is cos(3 s) in the
    curve parameter s.
    """
    if surface.surface_dim != 1:
        raise ValueError("curvature diffusion problem needs a parameterized curve")
    grid = build_band(surface, dx, StencilSpec(interp_degree=p))
    if gamma is None:
        gamma = PenaltyConfig.recommended(grid.d, dx)
    kappa = curvature_field(grid, p)
    a = diffusivity_from_curvature(kappa)
    M = varcoef_operator(grid, a, gamma, p)
    if grid.param is None:
        raise ValueError("curvature diffusion problem needs a parameterized curve")
    v0 = np.cos(3.0 * grid.param[:, 0])
    return grid, SemiDiscreteSystem(M), v0


def reference_curve_solver(
    sigma, a, u0, t_end: float, n: int = 1024, period: float = 2.0 * math.pi,
    dsigma=None,
):
    """Independent 1D reference for diffusion along a closed parametric curve.

    Solves u_t = (1/J) d/ds ( (a/J) du/ds ), J = |sigma'(s)|, on an n-point
    periodic grid with conservative second-order differences and RK4.
    Returns (s, u) at the grid points. This solver shares no code with the
    band machinery and serves as the oracle for the curve problems.
    """
    if n < 512:
        raise ValueError("n must be at least 512 for oracle accuracy")
    h = period / n
    s = h * np.arange(n)
    if dsigma is not None:
        J = np.linalg.norm(np.atleast_2d(dsigma(s)), axis=-1)
        J_half = np.linalg.norm(np.atleast_2d(dsigma(s + 0.5 * h)), axis=-1)
    else:
        eps = 1e-6 * period
        def speed(ss):
            d = (np.asarray(sigma(ss + eps)) - np.asarray(sigma(ss - eps))) / (2 * eps)
            return np.linalg.norm(d, axis=-1)
        J = speed(s)
        J_half = speed(s + 0.5 * h)
    a_half = np.asarray(a(s + 0.5 * h), dtype=float) * np.ones(n)
    u = np.asarray(u0(s), dtype=float).copy()

    c = a_half / J_half  # flux coefficient at the half points
    lam_max = 4.0 * np.max(c / (J * h * h)) * 1.05
    dt = 2.0 / lam_max
    steps = int(math.ceil(t_end / dt))
    dt = t_end / steps

    def rhs(w):
        flux = c * (np.roll(w, -1) - w) / h
        return (flux - np.roll(flux, 1)) / (J * h)

    for _ in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * dt * k1)
        k3 = rhs(u + 0.5 * dt * k2)
        k4 = rhs(u + dt * k3)
        u += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return s, u


# ---------------------------------------------------------------------------
# Problem registry (consumed by the CLI)
# ---------------------------------------------------------------------------

PROBLEM_NAMES = (
    "heat-circle",
    "heat-sphere",
    "biharmonic-circle",
    "poisson-circle",
    "gray-scott",
    "curvdiff-ellipse",
    "curvdiff-snowflake",
    "gs-curvature",
)


def make_problem(name: str, dx: float, p: int = 3, gamma=None, surface=None) -> ProblemSpec:
    """Construct the named problem with defaults for the given spacing."""
    if name not in PROBLEM_NAMES:
        raise ValueError(f"unknown problem {name!r}")

    if name == "heat-circle":
        surf = surface or geometry.Circle()
        gam = gamma or PenaltyConfig.recommended(2, dx)
        return ProblemSpec(
            name, surf, gam, p,
            initial=lambda g: exact_heat_circle(0.0, g.param[:, 0]),
            exact=exact_heat_circle,
            build=lambda g: SemiDiscreteSystem(heat_operator(g, gam, p)),
        )
    if name == "heat-sphere":
        surf = surface or geometry.Sphere()
        gam = gamma or PenaltyConfig.recommended(3, dx)
        return ProblemSpec(
            name, surf, gam, p,
            initial=lambda g: exact_heat_sphere(0.0, g.param[:, 0], g.param[:, 1]),
            exact=exact_heat_sphere,
            build=lambda g: SemiDiscreteSystem(heat_operator(g, gam, p)),
        )
    if name == "biharmonic-circle":
        surf = surface or geometry.Circle()
        gam = gamma or PenaltyConfig.recommended(2, dx)
        return ProblemSpec(
            name, surf, gam, p,
            initial=lambda g: exact_biharmonic_circle(0.0, g.param[:, 0]),
            exact=exact_biharmonic_circle,
            build=lambda g: SemiDiscreteSystem(biharmonic_operator(g, gam, p)),
        )
    if name == "poisson-circle":
        surf = surface or geometry.Circle()
        gam = gamma or PenaltyConfig.recommended(2, dx)
        return ProblemSpec(
            name, surf, gam, p,
            initial=lambda g: np.zeros(g.n_nodes),
            exact=lambda t, theta: np.cos(theta),
        )
    if name in ("curvdiff-ellipse", "curvdiff-snowflake"):
        if surface is None:
            surface = (
                geometry.Ellipse(2.0, 1.0)
                if name == "curvdiff-ellipse"
                else geometry.snowflake_curve()
            )
        gam = gamma or PenaltyConfig.recommended(2, dx)
        return ProblemSpec(
            name, surface, gam, p,
            initial=lambda g: np.cos(3.0 * g.param[:, 0]),
            exact=None,
        )
    # gray-scott variants: surface defaults to the unit sphere
    surf = surface or geometry.Sphere()
    gam = gamma or PenaltyConfig.recommended(surf.dim, dx)
    return ProblemSpec(
        name, surf, gam, p,
        initial=lambda g: gray_scott_initial(g),
        exact=None,
    )
