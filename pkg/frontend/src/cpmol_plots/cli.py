"""Command-line figure generation: one subcommand per plot kind."""

from __future__ import annotations

import argparse
import sys

from .io import MissingColumn
from .plots import (
    plot_convergence,
    plot_gamma_sweep,
    plot_stability,
    plot_surface_scatter,
)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cpmol-plot",
        description="Render figures from solver CSV/VTK artifacts",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("convergence", help="log-log error vs dx")
    pc.add_argument("csv")
    pc.add_argument("--out", required=True)

    ps = sub.add_parser("stability", help="max stable dt vs gamma")
    ps.add_argument("csv")
    ps.add_argument("--out", required=True)
    ps.add_argument("--dim", type=int, default=2,
                    help="embedding dimension for the predicted bound")

    pg = sub.add_parser("gamma-sweep", help="error vs gamma * dx^2")
    pg.add_argument("csv")
    pg.add_argument("--out", required=True)

    pv = sub.add_parser("scatter", help="3D point cloud from a VTK snapshot")
    pv.add_argument("vtk")
    pv.add_argument("--out", required=True)
    pv.add_argument("--field", default=None)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "convergence":
            info = plot_convergence(args.csv, args.out)
            print(f"wrote {args.out} (slope {info['slope']:.2f})")
        elif args.command == "stability":
            plot_stability(args.csv, args.out, d=args.dim)
            print(f"wrote {args.out}")
        elif args.command == "gamma-sweep":
            plot_gamma_sweep(args.csv, args.out)
            print(f"wrote {args.out}")
        else:
            info = plot_surface_scatter(args.vtk, args.out, field=args.field)
            print(f"wrote {args.out} ({info['points']} points)")
    except (OSError, ValueError, KeyError, MissingColumn) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
