"""Time integrators for the semi-discrete band systems.

Explicit schemes (forward Euler, classical RK4), implicit schemes for the
stiff linear operators (backward Euler, BDF2) and an SBDF2 IMEX scheme for
reaction-diffusion systems.  All integrators hit t_end exactly, shortening
the final step when dt does not divide the horizon.  An empirical
max-stable-dt scanner locates explicit stability boundaries by bisection.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonFinite, SolverFailure

__all__ = [
    "StepperConfig",
    "StabilityScanReport",
    "integrate",
    "forward_euler",
    "rk4",
    "backward_euler",
    "bdf2",
    "imex_bdf2",
    "max_stable_dt",
]

_SCHEMES = ("forward-euler", "rk4", "backward-euler", "bdf2", "imex-bdf2")


@dataclasses.dataclass(frozen=True)
class StepperConfig:
    """Scheme selection and step/solver parameters for one integration."""

    scheme: str
    dt: float
    t_end: float
    linear_solver: str = "direct-sparse"
    tol: float = 1e-10
    max_iter: int = 2000

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")
        if self.dt > self.t_end * (1 + 1e-12):
            raise ValueError("dt must not exceed t_end")
        if self.linear_solver not in ("direct-sparse", "iterative"):
            raise ValueError(f"unknown linear solver {self.linear_solver!r}")


@dataclasses.dataclass(frozen=True)
class StabilityScanReport:
    """Result of one empirical stability scan at a given penalty strength."""

    gamma: float
    dt_max_observed: float
    dt_predicted: float

    def __post_init__(self):
        if self.dt_max_observed <= 0:
            raise ValueError("observed stable dt must be positive")


def _steps(dt: float, t_end: float):
    """Full steps plus an optional shortened final step reaching t_end."""
    n = int(np.floor(t_end / dt + 1e-12))
    rem = t_end - n * dt
    if rem < 1e-12 * dt:
        rem = 0.0
    return n, rem


def _check_finite(v: np.ndarray):
    if not np.all(np.isfinite(v)):
        raise NonFinite("non-finite values during time stepping")


class _LinearSolver:
    """Solve (c I - dt M) x = b repeatedly for a fixed (c, dt).

    Direct mode factorizes once with SuperLU; iterative mode runs BiCGStab
    with the previous solution as the warm start.
    """

    def __init__(self, M: sp.csr_array, c: float, dt: float, config: StepperConfig):
        n = M.shape[0]
        self.A = (c * sp.eye_array(n, format="csr") - dt * M).tocsc()
        self.config = config
        self.lu = None
        if config.linear_solver == "direct-sparse":
            try:
                self.lu = spla.splu(self.A)
            except RuntimeError as exc:
                raise SolverFailure(f"sparse factorization failed: {exc}")

    def solve(self, b: np.ndarray, x0=None) -> np.ndarray:
        if self.lu is not None:
            return self.lu.solve(b)
        x, info = spla.bicgstab(
            self.A, b, x0=x0, rtol=self.config.tol, atol=0.0,
            maxiter=self.config.max_iter,
        )
        if info != 0:
            raise SolverFailure(f"iterative solve did not converge (info={info})")
        return x


def forward_euler(sys, v0, config: StepperConfig, callback=None) -> np.ndarray:
    """Explicit Euler: v <- v + dt f(t, v)."""
    v = np.asarray(v0, dtype=float).copy()
    n, rem = _steps(config.dt, config.t_end)
    t = 0.0
    for k in range(n):
        t = k * config.dt
        v = v + config.dt * sys.rhs(t, v)
        _check_finite(v)
        if callback is not None:
            callback(t + config.dt, v)
    if rem > 0:
        v = v + rem * sys.rhs(n * config.dt, v)
        _check_finite(v)
        if callback is not None:
            callback(config.t_end, v)
    return v


def _rk4_step(sys, t, v, dt):
    k1 = sys.rhs(t, v)
    k2 = sys.rhs(t + 0.5 * dt, v + 0.5 * dt * k1)
    k3 = sys.rhs(t + 0.5 * dt, v + 0.5 * dt * k2)
    k4 = sys.rhs(t + dt, v + dt * k3)
    return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(sys, v0, config: StepperConfig, callback=None) -> np.ndarray:
    """Classical four-stage Runge-Kutta."""
    v = np.asarray(v0, dtype=float).copy()
    n, rem = _steps(config.dt, config.t_end)
    for k in range(n):
        v = _rk4_step(sys, k * config.dt, v, config.dt)
        _check_finite(v)
        if callback is not None:
            callback((k + 1) * config.dt, v)
    if rem > 0:
        v = _rk4_step(sys, n * config.dt, v, rem)
        _check_finite(v)
        if callback is not None:
            callback(config.t_end, v)
    return v


def _forcing_of(sys):
    if sys.nonlinear is not None:
        raise ValueError("implicit scheme requires a purely linear system")
    return sys.forcing


def backward_euler(sys, v0, config: StepperConfig, callback=None) -> np.ndarray:
    """Implicit Euler on the linear part: (I - dt M) v' = v + dt g(t')."""
    forcing = _forcing_of(sys)
    v = np.asarray(v0, dtype=float).copy()
    n, rem = _steps(config.dt, config.t_end)
    solver = _LinearSolver(sys.linear, 1.0, config.dt, config)
    for k in range(n):
        t1 = (k + 1) * config.dt
        b = v if forcing is None else v + config.dt * forcing(t1)
        v = solver.solve(b, x0=v)
        _check_finite(v)
        if callback is not None:
            callback(t1, v)
    if rem > 0:
        tail = _LinearSolver(sys.linear, 1.0, rem, config)
        b = v if forcing is None else v + rem * forcing(config.t_end)
        v = tail.solve(b, x0=v)
        _check_finite(v)
        if callback is not None:
            callback(config.t_end, v)
    return v


def _sbdf2_run(sys, v0, config: StepperConfig, callback, nonlinear):
    """Shared SBDF2 driver; with nonlinear None this is plain BDF2.

    Update: (3/2 I - dt M) v^{n+1} = 2 v^n - 1/2 v^{n-1}
            + dt (2 N(t_n, v^n) - N(t_{n-1}, v^{n-1})) + dt g(t_{n+1}),
    bootstrapped with one backward-Euler step (explicit Euler on N).
    """
    forcing = sys.forcing
    dt = config.dt
    v_prev = np.asarray(v0, dtype=float).copy()
    n, rem = _steps(dt, config.t_end)
    if n == 0:
        # the whole horizon fits in one shortened step: single implicit Euler
        n, rem, dt = 1, 0.0, config.t_end

    be = _LinearSolver(sys.linear, 1.0, dt, config)
    b = v_prev.copy()
    if nonlinear is not None:
        b += dt * nonlinear(0.0, v_prev)
    if forcing is not None:
        b += dt * forcing(dt)
    v = be.solve(b, x0=v_prev)
    _check_finite(v)
    if callback is not None:
        callback(dt, v)

    solver = _LinearSolver(sys.linear, 1.5, dt, config) if n > 1 else None
    for k in range(1, n):
        t_n = k * dt
        b = 2.0 * v - 0.5 * v_prev
        if nonlinear is not None:
            b += dt * (2.0 * nonlinear(t_n, v) - nonlinear(t_n - dt, v_prev))
        if forcing is not None:
            b += dt * forcing(t_n + dt)
        v_prev, v = v, solver.solve(b, x0=v)
        _check_finite(v)
        if callback is not None:
            callback(t_n + dt, v)
    if rem > 0:
        # finish with one shortened backward-Euler step
        tail = _LinearSolver(sys.linear, 1.0, rem, config)
        b = v.copy()
        if nonlinear is not None:
            b += rem * nonlinear(n * dt, v)
        if forcing is not None:
            b += rem * forcing(config.t_end)
        v = tail.solve(b, x0=v)
        _check_finite(v)
        if callback is not None:
            callback(config.t_end, v)
    return v


def bdf2(sys, v0, config: StepperConfig, callback=None) -> np.ndarray:
    """Second-order backward differentiation on a linear system."""
    _forcing_of(sys)
    return _sbdf2_run(sys, v0, config, callback, None)


def imex_bdf2(sys, v0, config: StepperConfig, callback=None) -> np.ndarray:
    """SBDF2: linear part implicit, nonlinear part extrapolated explicitly.

    With no nonlinear part the output is bitwise identical to bdf2.
    """
    return _sbdf2_run(sys, v0, config, callback, sys.nonlinear)


_INTEGRATORS = {
    "forward-euler": forward_euler,
    "rk4": rk4,
    "backward-euler": backward_euler,
    "bdf2": bdf2,
    "imex-bdf2": imex_bdf2,
}


def integrate(sys, v0, config: StepperConfig, callback=None) -> np.ndarray:
    """Dispatch to the integrator named by config.scheme."""
    return _INTEGRATORS[config.scheme](sys, v0, config, callback)


def max_stable_dt(
    op: sp.csr_array,
    scheme: str = "forward-euler",
    dt_hi: float = 1.0,
    n_steps: int = 500,
    growth: float = 10.0,
    seed: int = 1234,
) -> float:
    """Empirical explicit stability boundary, to two significant digits.

    A step size is stable if the max norm of the iterate stays within the
    growth factor of the initial random vector over n_steps. Bisects on the
    boundary; returns dt_hi if even that is stable.
    """
    if scheme not in ("forward-euler", "rk4"):
        raise ValueError("stability scan needs an explicit scheme")
    n = op.shape[0]
    rng = np.random.default_rng(seed)
    v0 = rng.uniform(-1.0, 1.0, size=n)
    bound = growth * np.abs(v0).max()

    def stable(dt: float) -> bool:
        v = v0.copy()
        for k in range(n_steps):
            if scheme == "forward-euler":
                v = v + dt * (op @ v)
            else:
                k1 = op @ v
                k2 = op @ (v + 0.5 * dt * k1)
                k3 = op @ (v + 0.5 * dt * k2)
                k4 = op @ (v + dt * k3)
                v = v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            m = np.abs(v).max()
            if not np.isfinite(m) or m > bound:
                return False
        return True

    if stable(dt_hi):
        return dt_hi
    hi = dt_hi
    lo = dt_hi
    while not stable(lo):
        lo /= 2.0
        if lo < 1e-300:
            raise SolverFailure("no stable step size found")
    hi = 2.0 * lo
    while (hi - lo) > 0.005 * lo:
        mid = 0.5 * (hi + lo)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo
