"""Command-line front end.

Subcommands:
  converge         convergence study over a list of grid spacings
  stability-scan   empirical max stable dt versus the predicted bound
  gamma-sweep      accuracy/stability as a function of gamma * dx^2
  curvature-check  discrete curvature field against analytic values
  simulate         pattern/diffusion runs with periodic CSV/VTK snapshots

All artifacts are manifest-prefixed CSV (plus legacy VTK point clouds for
3D snapshots); identical command and seed give byte-identical output apart
from the wall-time header line.  Exit codes: 0 success, 2 usage error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import scipy.sparse as sp

from . import geometry, problems
from .assembly import (
    PenaltyConfig,
    SemiDiscreteSystem,
    curvature_field,
    gs_diffusivity_ratio,
    heat_operator,
    solve_poisson,
)
from .band import StencilSpec, build_band
from .errors import CpmolError, NonFinite, SolverFailure
from .operators import interpolation_matrix
from .output import RunManifest, now, write_csv, write_vtk_points
from .timestep import StepperConfig, integrate, max_stable_dt

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_EXPLICIT = ("forward-euler", "rk4")


def _apply_thread_cap():
    cap = os.environ.get("CPMOL_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(int(cap))
    except ImportError:
        pass


def _parse_floats(text: str):
    vals = [float(v) for v in text.split(",") if v.strip()]
    return vals


def _surface_by_name(name: str, mesh_path=None):
    if mesh_path is not None:
        return geometry.load_mesh(mesh_path)
    table = {
        "circle": lambda: geometry.Circle(),
        "sphere": lambda: geometry.Sphere(),
        "sphere2": lambda: geometry.Sphere(radius=2.0),
        "ellipse": lambda: geometry.Ellipse(2.0, 1.0),
        "snowflake": geometry.snowflake_curve,
    }
    if name not in table:
        raise ValueError(f"unknown surface {name!r}")
    return table[name]()


def _resolve_dt(policy: str, dx: float, scheme: str) -> float:
    if policy == "auto":
        policy = "dx2/4" if scheme in _EXPLICIT else "dx/4"
    if policy == "dx2/4":
        return dx * dx / 4.0
    if policy == "dx/4":
        return dx / 4.0
    return float(policy)


def _resolve_gamma(flag: str, d: int, dx: float, dt: float) -> PenaltyConfig:
    if flag == "auto":
        return PenaltyConfig.recommended(d, dx)
    if flag == "one-over-dt":
        return PenaltyConfig.ruuth_merriman(dt)
    return PenaltyConfig(float(flag))


def cmd_converge(args) -> int:
    t_start = now()
    dx_list = _parse_floats(args.dx)
    if not dx_list:
        raise ValueError("empty dx list")
    rows = []
    errs = []
    for dx in dx_list:
        prob = problems.make_problem(args.problem, dx, p=args.p)
        grid = build_band(prob.surface, dx, StencilSpec(interp_degree=args.p))
        dt = _resolve_dt(args.dt_policy, dx, args.scheme)
        gamma = _resolve_gamma(args.gamma, grid.d, dx, dt)
        if args.problem == "poisson-circle":
            v = solve_poisson(grid, gamma, args.p, f=lambda y: -y[:, 0] / np.hypot(y[:, 0], y[:, 1]))
            # the solution is defined up to a constant; compare mean-free
            pts, par = prob.surface.sample(problems.default_samples(prob.surface, dx))
            approx = interpolation_matrix(grid, pts) @ v
            ex = prob.exact(0.0, par[:, 0])
            approx = approx - approx.mean() + ex.mean()
            err = float(np.abs(approx - ex).max())
            dt_out = float("nan")
            n_samples = len(pts)
        else:
            prob = problems.make_problem(args.problem, dx, p=args.p, gamma=gamma)
            sys_ = prob.build(grid)
            v0 = prob.initial(grid)
            cfg = StepperConfig(args.scheme, dt, args.t_end, linear_solver=args.linear_solver)
            v = integrate(sys_, v0, cfg)
            rep = problems.restrict_and_error(grid, v, prob.exact, args.t_end, dt=dt)
            err, dt_out, n_samples = rep.max_err, dt, rep.samples
        errs.append(err)
        rows.append((dx, dt_out, args.p, gamma.gamma, err, n_samples))
    footer = []
    for (dx1, *_r1), (dx2, *_r2), e1, e2 in zip(rows, rows[1:], errs, errs[1:]):
        order = np.log(e1 / e2) / np.log(dx1 / dx2)
        footer.append(f"order_{dx1:g}_to_{dx2:g} = {order:.17g}")
    if len(rows) > 1:
        slope = np.polyfit(np.log(dx_list), np.log(errs), 1)[0]
        footer.append(f"ls_slope = {slope:.17g}")
    manifest = RunManifest(
        command="converge", problem=args.problem,
        params={
            "scheme": args.scheme, "p": args.p, "gamma": args.gamma,
            "dt_policy": args.dt_policy, "t_end": args.t_end,
        },
        seed=args.seed, wall_time=now() - t_start,
    )
    write_csv(args.out, ["dx", "dt", "p", "gamma", "max_err", "samples"], rows,
              manifest, footer)
    return EXIT_OK


def cmd_stability_scan(args) -> int:
    t_start = now()
    gammas = _parse_floats(args.gamma_list)
    if not gammas:
        raise argparse.ArgumentTypeError("empty gamma list")
    dx = args.dx
    surface = geometry.Circle()
    grid = build_band(surface, dx, StencilSpec(interp_degree=args.p))
    rows = []
    for g in gammas:
        # test problem u_t = lap_S u - u
        A = (heat_operator(grid, g, args.p)
             - sp.eye_array(grid.n_nodes, format="csr")).tocsr()
        predicted = min(dx * dx / (2.0 * grid.d), 2.0 / g)
        observed = max_stable_dt(A, args.scheme, dt_hi=4.0 * predicted)
        rows.append((g, observed, predicted))
    manifest = RunManifest(
        command="stability-scan", problem="heat-decay-circle",
        params={"dx": dx, "scheme": args.scheme, "p": args.p},
        seed=args.seed, wall_time=now() - t_start,
    )
    write_csv(args.out, ["gamma", "dt_max_observed", "dt_predicted"], rows, manifest)
    return EXIT_OK


def cmd_gamma_sweep(args) -> int:
    t_start = now()
    gdx2 = _parse_floats(args.gamma_dx2_list)
    if not gdx2:
        raise argparse.ArgumentTypeError("empty gamma*dx^2 list")
    dx = args.dx
    surface = geometry.Circle()
    grid = build_band(surface, dx, StencilSpec(interp_degree=args.p))
    dt = _resolve_dt(args.dt_policy, dx, args.scheme)
    v0 = problems.exact_heat_circle(0.0, grid.param[:, 0])
    amp0 = np.abs(v0).max()
    rows = []
    for val in gdx2:
        g = val / (dx * dx)
        M = heat_operator(grid, g, args.p)
        cfg = StepperConfig(args.scheme, dt, args.t_end, linear_solver=args.linear_solver)
        try:
            v = integrate(SemiDiscreteSystem(M), v0, cfg)
            stable = int(np.abs(v).max() <= 10.0 * amp0)
            if stable:
                rep = problems.restrict_and_error(grid, v, problems.exact_heat_circle,
                                                  args.t_end, dt=dt)
                err = rep.max_err
            else:
                err = float("inf")
        except (NonFinite, SolverFailure):
            stable, err = 0, float("inf")
        rows.append((val, g, err, stable))
    manifest = RunManifest(
        command="gamma-sweep", problem="heat-circle",
        params={"dx": dx, "dt": dt, "scheme": args.scheme, "p": args.p,
                "t_end": args.t_end},
        seed=args.seed, wall_time=now() - t_start,
    )
    write_csv(args.out, ["gamma_dx2", "gamma", "max_err", "stable"], rows, manifest)
    return EXIT_OK


def cmd_curvature_check(args) -> int:
    t_start = now()
    surface = _surface_by_name(args.surface, args.mesh)
    grid = build_band(surface, args.dx, StencilSpec(interp_degree=args.p))
    kappa = curvature_field(grid, args.p)
    pts, par = surface.sample(400)
    vals = interpolation_matrix(grid, pts) @ kappa
    exact = np.array([geometry.exact_mean_curvature(surface, y) for y in pts])
    rows = [
        (par[i, 0], vals[i], exact[i], abs(vals[i] - exact[i]))
        for i in range(len(pts))
    ]
    manifest = RunManifest(
        command="curvature-check", problem=args.surface,
        params={"dx": args.dx, "p": args.p}, seed=args.seed,
        wall_time=now() - t_start,
    )
    write_csv(args.out, ["param", "kappa_computed", "kappa_exact", "abs_err"],
              rows, manifest)
    return EXIT_OK


def _write_snapshot(prefix, step, grid, fields, manifest):
    rows = zip(range(grid.n_nodes), *[fields[k] for k in fields])
    write_csv(f"{prefix}_step{step:06d}.csv",
              ["linear_index"] + list(fields), rows, manifest)
    if grid.d == 3:
        write_vtk_points(f"{prefix}_step{step:06d}.vtk", grid.cp, fields,
                         title=f"step {step}")


def cmd_simulate(args) -> int:
    t_start = now()
    surface = _surface_by_name(args.surface, args.mesh)
    grid = build_band(surface, args.dx, StencilSpec(interp_degree=args.p))
    gamma = _resolve_gamma(args.gamma, grid.d, args.dx, args.dt)
    manifest = RunManifest(
        command="simulate", problem=args.problem,
        params={"surface": args.surface, "dx": args.dx, "dt": args.dt,
                "steps": args.steps, "p": args.p, "gamma": gamma.gamma,
                "nu_u": args.nu_u if args.nu_u is not None else "auto",
                "snap_every": args.snap_every},
        seed=args.seed, wall_time=None,
    )

    n = grid.n_nodes
    if args.problem in ("gray-scott", "gs-curvature"):
        nu_u = args.nu_u if args.nu_u is not None else args.dx * args.dx / 9.0
        if args.problem == "gray-scott":
            nu_v = args.nu_v if args.nu_v is not None else nu_u / 2.0
        else:
            kappa = curvature_field(grid, args.p)
            nu_v = gs_diffusivity_ratio(kappa, kappa.max(), kappa.min() - 1e-12,
                                        nu_u=nu_u)
        sys_ = problems.gray_scott_system(grid, nu_u, nu_v, problems.GS_F,
                                          problems.GS_K, gamma, args.p)
        w = problems.gray_scott_initial(grid, seed=args.seed)
        split = lambda w: {"u": w[:n], "v": w[n:]}
        scheme = "imex-bdf2"
    elif args.problem in ("curvdiff-ellipse", "curvdiff-snowflake"):
        grid, sys_, w = problems.curvature_diffusion_problem(
            surface, args.dx, args.p, gamma)
        split = lambda w: {"u": w}
        scheme = "bdf2"
    else:
        raise ValueError(f"problem {args.problem!r} is not simulatable")

    _write_snapshot(args.out, 0, grid, split(w), manifest)
    if args.steps == 0:
        return EXIT_OK
    cfg = StepperConfig(scheme, args.dt, args.steps * args.dt,
                        linear_solver=args.linear_solver)
    state = {"k": 0, "w": w}

    def snap(t, v):
        state["k"] += 1
        state["w"] = v
        if args.snap_every and state["k"] % args.snap_every == 0:
            _write_snapshot(args.out, state["k"], grid, split(v), manifest)

    try:
        w = integrate(sys_, w, cfg, callback=snap)
    except NonFinite:
        manifest.params["aborted"] = 1
        _write_snapshot(args.out + "_partial", state["k"], grid,
                        split(state["w"]), manifest)
        raise
    manifest.wall_time = now() - t_start
    _write_snapshot(args.out + "_final", state["k"], grid, split(w), manifest)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cpmol",
        description="Penalty-stabilized closest point solver for surface PDEs",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scheme_default="forward-euler"):
        p.add_argument("--p", type=int, default=3, help="interpolation degree")
        p.add_argument("--gamma", default="auto",
                       help="penalty strength: auto, one-over-dt, or a value")
        p.add_argument("--scheme", default=scheme_default,
                       choices=["forward-euler", "rk4", "backward-euler",
                                "bdf2", "imex-bdf2"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--linear-solver", default="direct-sparse",
                       choices=["direct-sparse", "iterative"])
        p.add_argument("--out", required=True, help="output CSV path")

    pc = sub.add_parser("converge", help="convergence study over dx list")
    pc.add_argument("--problem", required=True, choices=problems.PROBLEM_NAMES)
    pc.add_argument("--dx", required=True, help="comma-separated spacings")
    pc.add_argument("--dt-policy", default="auto",
                    help="dx2/4, dx/4, or an explicit value")
    pc.add_argument("--t-end", type=float, default=0.5)
    common(pc)
    pc.set_defaults(func=cmd_converge)

    ps = sub.add_parser("stability-scan", help="max stable dt vs prediction")
    ps.add_argument("--gamma-list", required=True)
    ps.add_argument("--dx", type=float, required=True)
    common(ps)
    ps.set_defaults(func=cmd_stability_scan)

    pg = sub.add_parser("gamma-sweep", help="error vs gamma * dx^2")
    pg.add_argument("--gamma-dx2-list", required=True)
    pg.add_argument("--dx", type=float, required=True)
    pg.add_argument("--dt-policy", default="auto")
    pg.add_argument("--t-end", type=float, default=0.5)
    common(pg)
    pg.set_defaults(func=cmd_gamma_sweep)

    pk = sub.add_parser("curvature-check", help="kappa field vs analytic")
    pk.add_argument("--surface", default="circle")
    pk.add_argument("--mesh", default=None)
    pk.add_argument("--dx", type=float, required=True)
    common(pk)
    pk.set_defaults(func=cmd_curvature_check)

    pm = sub.add_parser("simulate", help="pattern/diffusion runs with snapshots")
    pm.add_argument("--problem", required=True,
                    choices=["gray-scott", "gs-curvature", "curvdiff-ellipse",
                             "curvdiff-snowflake"])
    pm.add_argument("--surface", default="sphere")
    pm.add_argument("--mesh", default=None)
    pm.add_argument("--dx", type=float, required=True)
    pm.add_argument("--dt", type=float, required=True)
    pm.add_argument("--steps", type=int, required=True)
    pm.add_argument("--snap-every", type=int, default=0)
    pm.add_argument("--nu-u", type=float, default=None)
    pm.add_argument("--nu-v", type=float, default=None)
    common(pm)
    pm.set_defaults(func=cmd_simulate)

    return ap


def main(argv=None) -> int:
    _apply_thread_cap()
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonFinite, SolverFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CpmolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
