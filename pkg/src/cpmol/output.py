"""Deterministic CSV and VTK artifact writers.

Every CSV starts with '#'-prefixed comment lines carrying the run manifest
(command, problem, parameters, seed, version, wall time) so each artifact
is self-describing.  Floats are written with 17 significant digits for a
lossless round trip.  3D snapshots go to legacy ASCII VTK point clouds.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from . import __version__

__all__ = ["RunManifest", "write_csv", "read_csv", "write_vtk_points"]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) or isinstance(x, np.floating):
        return format(float(x), ".17g")
    return str(x)


@dataclasses.dataclass
class RunManifest:
    """Provenance of one CLI run, serialized into artifact headers."""

    command: str
    problem: str = ""
    params: dict = dataclasses.field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    wall_time: float | None = None

    def header_lines(self):
        lines = [f"# command: {self.command}"]
        if self.problem:
            lines.append(f"# problem: {self.problem}")
        for key in self.params:
            lines.append(f"# {key}: {_fmt(self.params[key])}")
        if self.seed is not None:
            lines.append(f"# seed: {self.seed}")
        lines.append(f"# version: {self.version}")
        if self.wall_time is not None:
            # excluded from byte-identity comparisons
            lines.append(f"# wall_time_s: {self.wall_time:.3f}")
        return lines


def write_csv(path, columns, rows, manifest: RunManifest | None = None, footer=None):
    """Write a manifest-prefixed CSV. rows is an iterable of sequences."""
    with open(path, "w") as fh:
        if manifest is not None:
            for line in manifest.header_lines():
                fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
        for line in footer or ():
            fh.write(f"# {line}\n")


def read_csv(path):
    """Read a manifest CSV back: (meta dict, column dict of float arrays).

    Non-numeric cells are kept as strings; 'inf'/'nan' parse as floats.
    """
    meta = {}
    names = None
    cols = None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, val = body.partition(":")
                    meta[key.strip()] = val.strip()
                elif "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            cells = line.split(",")
            if names is None:
                names = cells
                cols = {c: [] for c in names}
                continue
            for c, cell in zip(names, cells):
                try:
                    cols[c].append(float(cell))
                except ValueError:
                    cols[c].append(cell)
    if names is None:
        return meta, {}
    return meta, {c: np.asarray(cols[c]) for c in names}


def write_vtk_points(path, points, scalars, title="cpmol snapshot"):
    """Legacy ASCII VTK point cloud with named point scalars.

    points is (n, 3) (2D points are padded with z = 0); scalars is a dict
    mapping field name to a length-n vector.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    if d == 2:
        points = np.column_stack([points, np.zeros(n)])
    elif d != 3:
        raise ValueError("points must be 2D or 3D")
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(title[:255] + "\n")
        fh.write("ASCII\n")
        fh.write("DATASET POLYDATA\n")
        fh.write(f"POINTS {n} double\n")
        for row in points:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")
        fh.write(f"VERTICES {n} {2 * n}\n")
        for i in range(n):
            fh.write(f"1 {i}\n")
        fh.write(f"POINT_DATA {n}\n")
        for name, vals in scalars.items():
            vals = np.asarray(vals, dtype=float)
            if len(vals) != n:
                raise ValueError(f"scalar field {name!r} length mismatch")
            fh.write(f"SCALARS {name} double 1\n")
            fh.write("LOOKUP_TABLE default\n")
            for x in vals:
                fh.write(format(x, ".17g") + "\n")


def now() -> float:
    return time.perf_counter()
