"""Assembly of the embedding evolution operators.

Builds the full right-hand-side matrices for the penalty-stabilized
embedding equations on a band: heat M = E L - gamma (I - E), the chained
biharmonic -E L E L - gamma (I - E), the variable-coefficient divergence
form, the Poisson linear system, and the curvature field recovered from
the closest point components.

All functions are pure; every returned matrix is a fresh CSR array.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .band import BandedGrid
from .errors import NonpositiveDiffusivity, SingularSystem
from .operators import (
    avg_forward,
    diff_backward,
    diff_forward,
    extension_matrix,
    laplacian,
)

__all__ = [
    "PenaltyConfig",
    "SemiDiscreteSystem",
    "heat_operator",
    "biharmonic_operator",
    "varcoef_operator",
    "curvature_field",
    "diffusivity_from_curvature",
    "gs_diffusivity_ratio",
    "poisson_system",
    "solve_poisson",
]


@dataclasses.dataclass(frozen=True)
class PenaltyConfig:
    """Penalty strength gamma and the policy that produced it.

    Policies:
      explicit        gamma given directly;
      recommended     gamma = 2 d / dx^2 for dimension d and spacing dx;
      ruuth-merriman  gamma = 1 / dt, which makes one forward Euler step of
                      the stabilized equation coincide with the classical
                      extend-then-step update.

    Negative gamma destabilizes the penalty term, so it is rejected unless
    allow_negative is set (useful only for instability experiments).
    """

    gamma: float
    policy: str = "explicit"
    allow_negative: bool = False

    def __post_init__(self):
        if self.policy not in ("explicit", "recommended", "ruuth-merriman"):
            raise ValueError(f"unknown penalty policy {self.policy!r}")
        if self.gamma < 0 and not self.allow_negative:
            raise ValueError("gamma must be >= 0 (set allow_negative to override)")

    @classmethod
    def recommended(cls, d: int, dx: float) -> "PenaltyConfig":
        return cls(gamma=2.0 * d / (dx * dx), policy="recommended")

    @classmethod
    def ruuth_merriman(cls, dt: float) -> "PenaltyConfig":
        return cls(gamma=1.0 / dt, policy="ruuth-merriman")


@dataclasses.dataclass
class SemiDiscreteSystem:
    """Semi-discrete ODE system dv/dt = linear v + nonlinear(t, v) + forcing(t).

    linear is the stiff part (always present, possibly zero); nonlinear and
    forcing are optional callables evaluated explicitly by the steppers.
    """

    linear: sp.csr_array
    nonlinear: Callable[[float, np.ndarray], np.ndarray] | None = None
    forcing: Callable[[float], np.ndarray] | None = None

    def __post_init__(self):
        n, m = self.linear.shape
        if n != m:
            raise ValueError("linear part must be square")

    @property
    def n(self) -> int:
        return self.linear.shape[0]

    def rhs(self, t: float, v: np.ndarray) -> np.ndarray:
        out = self.linear @ v
        if self.nonlinear is not None:
            out = out + self.nonlinear(t, v)
        if self.forcing is not None:
            out = out + self.forcing(t)
        return out


def _penalty(grid: BandedGrid, E: sp.csr_array, gamma) -> sp.csr_array:
    g = gamma.gamma if isinstance(gamma, PenaltyConfig) else float(gamma)
    eye = sp.eye_array(grid.n_nodes, format="csr")
    return (g * (eye - E)).tocsr()


def heat_operator(grid: BandedGrid, gamma, p: int | None = None) -> sp.csr_array:
    """Stabilized diffusion operator M = E L - gamma (I - E)."""
    E = extension_matrix(grid, p)
    L = laplacian(grid)
    M = (E @ L - _penalty(grid, E, gamma)).tocsr()
    M.sort_indices()
    return M


def biharmonic_operator(grid: BandedGrid, gamma, p: int | None = None) -> sp.csr_array:
    """Chained fourth-order operator -E L E L - gamma (I - E).

    The inner extension is re-applied before the second Laplacian; this is
    not the square of the stabilized second-order operator.
    """
    E = extension_matrix(grid, p)
    L = laplacian(grid)
    EL = (E @ L).tocsr()
    M = (-(EL @ EL) - _penalty(grid, E, gamma)).tocsr()
    M.sort_indices()
    return M


def varcoef_operator(
    grid: BandedGrid, a: np.ndarray, gamma, p: int | None = None
) -> sp.csr_array:
    """Divergence-form operator with diffusivity a sampled on the band.

    E sum_axis D_b diag(A_f a) D_f - gamma (I - E), the conservative
    staggered discretization of div(a grad u).
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (grid.n_nodes,):
        raise ValueError("diffusivity must have one value per band node")
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise NonpositiveDiffusivity("diffusivity must be strictly positive")
    E = extension_matrix(grid, p)
    acc = None
    for axis in range(grid.d):
        af = avg_forward(grid, axis) @ a
        term = diff_backward(grid, axis) @ sp.diags_array(af, format="csr") @ diff_forward(grid, axis)
        acc = term if acc is None else acc + term
    M = (E @ acc - _penalty(grid, E, gamma)).tocsr()
    M.sort_indices()
    return M


def curvature_field(grid: BandedGrid, p: int | None = None) -> np.ndarray:
    """Mean curvature magnitude recovered from the closest point map.

    Applies the Laplacian to each cp coordinate, takes the Euclidean norm
    per node, and extends the result back over the band.
    """
    L = laplacian(grid)
    s = np.zeros(grid.n_nodes)
    for i in range(grid.d):
        lc = L @ grid.cp[:, i]
        s += lc * lc
    E = extension_matrix(grid, p)
    return E @ np.sqrt(s)


def diffusivity_from_curvature(kappa: np.ndarray) -> np.ndarray:
    """Diffusivity a = 1/(1 + |kappa|), always in (0, 1]."""
    return 1.0 / (1.0 + np.abs(np.asarray(kappa, dtype=float)))


def gs_diffusivity_ratio(kappa, c1: float, c2: float, nu_u: float = 1.0):
    """Curvature-dependent second diffusivity nu_v = nu_u / (3 - 2 (k-c2)/(c1-c2)).

    c1 and c2 are the maximum and minimum curvature values; the divisor runs
    linearly from 3 at k = c2 down to 1 at k = c1.
    """
    if not c1 > c2:
        raise ValueError("c1 must exceed c2")
    kappa = np.asarray(kappa, dtype=float)
    return nu_u / (3.0 - 2.0 * (kappa - c2) / (c1 - c2))


def poisson_system(grid: BandedGrid, gamma, p: int | None = None, f=None):
    """Matrix and right-hand side of E L v - gamma (I - E) v = E f.

    f is a function of surface points (evaluated at the node closest
    points); the right-hand side is its extension. The matrix annihilates
    constants, so solve_poisson pins the nullspace.
    """
    g = gamma.gamma if isinstance(gamma, PenaltyConfig) else float(gamma)
    if g == 0:
        raise ValueError("Poisson system requires a nonzero gamma")
    A = heat_operator(grid, g, p)
    if f is None:
        b = np.zeros(grid.n_nodes)
    else:
        E = extension_matrix(grid, p)
        b = E @ np.asarray(f(grid.cp), dtype=float)
    return A, b


def solve_poisson(grid: BandedGrid, gamma, p: int | None = None, f=None) -> np.ndarray:
    """Solve the stabilized Poisson problem with the constant mode pinned.

    Appends a Lagrange multiplier row/column enforcing zero mean over the
    band, factorizes the bordered system, and checks the residual.
    """
    A, b = poisson_system(grid, gamma, p, f)
    n = grid.n_nodes
    one = np.ones((n, 1)) / n
    K = sp.block_array([[A, one], [one.T, None]], format="csc")
    rhs = np.concatenate([b, [0.0]])
    try:
        lu = spla.splu(K)
        sol = lu.solve(rhs)
    except RuntimeError as exc:
        raise SingularSystem(f"bordered Poisson factorization failed: {exc}")
    v = sol[:n]
    resid = np.linalg.norm(A @ v + one[:, 0] * sol[n] - b)
    scale = 1.0 + np.linalg.norm(b)
    if not np.isfinite(resid) or resid > 1e-8 * scale:
        raise SingularSystem(f"Poisson residual too large: {resid:.3e}")
    return v
