"""Readers for the solver's CSV and VTK artifact formats.

The plotting package talks to the solver only through files, so the
readers here are self-contained: manifest CSVs ('#'-prefixed key/value
header lines, comma-separated numeric body, '#'-prefixed footer lines)
and legacy ASCII VTK POLYDATA point clouds with named point scalars.
"""

from __future__ import annotations

import numpy as np

__all__ = ["read_manifest_csv", "read_vtk_points", "MissingColumn"]


class MissingColumn(KeyError):
    """A required column is absent from the input CSV."""


def read_manifest_csv(path):
    """Parse a manifest CSV into (meta dict, column dict).

    Header lines '# key: value' and footer lines '# key = value' both land
    in meta.  Numeric cells become float arrays; anything else stays a
    string array.
    """
    meta = {}
    names = None
    raw = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                for sep in (":", "="):
                    if sep in body:
                        key, _, val = body.partition(sep)
                        meta[key.strip()] = val.strip()
                        break
                continue
            if names is None:
                names = line.split(",")
            else:
                raw.append(line.split(","))
    if names is None:
        raise ValueError(f"{path}: no column header found")
    cols = {}
    for j, name in enumerate(names):
        cells = [row[j] for row in raw]
        try:
            cols[name] = np.array([float(c) for c in cells])
        except ValueError:
            cols[name] = np.array(cells)
    return meta, cols


def require_columns(cols, names, path=""):
    for name in names:
        if name not in cols:
            raise MissingColumn(f"{path}: missing column {name!r}")


def read_vtk_points(path):
    """Read a legacy ASCII VTK POLYDATA point cloud.

    Returns (points (n, 3), scalars dict of (n,) arrays).
    """
    with open(path) as fh:
        tokens = fh.read().split()
    if not tokens:
        raise ValueError(f"{path}: empty VTK file")
    try:
        i = tokens.index("POINTS")
    except ValueError:
        raise ValueError(f"{path}: no POINTS section")
    n = int(tokens[i + 1])
    start = i + 3
    pts = np.array(tokens[start : start + 3 * n], dtype=float).reshape(n, 3)
    scalars = {}
    j = start + 3 * n
    while j < len(tokens):
        if tokens[j] == "SCALARS":
            name = tokens[j + 1]
            # skip type, optional component count, LOOKUP_TABLE <name>
            k = j + 3
            if tokens[k].isdigit():
                k += 1
            if tokens[k] == "LOOKUP_TABLE":
                k += 2
            scalars[name] = np.array(tokens[k : k + n], dtype=float)
            j = k + n
        else:
            j += 1
    return pts, scalars
