"""Figure builders for the solver's study artifacts.

Each function reads one artifact, renders one PNG, and returns a small
info dict (annotated values, axis scales) so callers and tests can verify
what was drawn without decoding the image.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import read_manifest_csv, read_vtk_points, require_columns

__all__ = [
    "plot_convergence",
    "plot_stability",
    "plot_gamma_sweep",
    "plot_surface_scatter",
]


def _save(fig, out):
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_convergence(csv_path, out_path):
    """Log-log max error versus dx with a least-squares slope annotation.

    Rows sharing a p value form one series; the slope label reports the
    overall least-squares slope of the finest-degree series.
    """
    meta, cols = read_manifest_csv(csv_path)
    require_columns(cols, ("dx", "max_err"), csv_path)
    dx = cols["dx"]
    err = cols["max_err"]
    p_vals = cols["p"] if "p" in cols else np.zeros_like(dx)

    fig, ax = plt.subplots(figsize=(5, 4))
    slopes = {}
    for p in np.unique(p_vals):
        m = p_vals == p
        label = f"p = {int(p)}" if "p" in cols else "error"
        ax.loglog(dx[m], err[m], "o-", label=label)
        if m.sum() > 1:
            slopes[p] = float(np.polyfit(np.log(dx[m]), np.log(err[m]), 1)[0])
    slope = slopes[max(slopes)] if slopes else float("nan")
    ax.annotate(
        f"slope = {slope:.2f}", xy=(0.05, 0.9), xycoords="axes fraction"
    )
    ax.set_xlabel(r"$\Delta x$")
    ax.set_ylabel("max error")
    title = meta.get("problem", "convergence")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, out_path)
    return {
        "slope": slope,
        "series": len(slopes) if slopes else int(len(np.unique(p_vals))),
        "xscale": "log",
        "yscale": "log",
        "path": str(out_path),
    }


def predicted_dt(gamma, dx, d=2):
    """Stability bound min(dx^2 / 2d, 2 / gamma) for explicit Euler."""
    gamma = np.asarray(gamma, dtype=float)
    return np.minimum(dx * dx / (2.0 * d), 2.0 / gamma)


def plot_stability(csv_path, out_path, d=2):
    """Observed max stable dt versus gamma with the predicted bound overlay."""
    meta, cols = read_manifest_csv(csv_path)
    require_columns(cols, ("gamma", "dt_max_observed", "dt_predicted"), csv_path)
    gamma = cols["gamma"]

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(gamma, cols["dt_max_observed"], "o", label="observed")
    g_line = np.geomspace(gamma.min() / 2, gamma.max() * 2, 200)
    if "dx" in meta:
        dx = float(meta["dx"])
        ax.loglog(g_line, predicted_dt(g_line, dx, d), "-",
                  label=r"min($\Delta x^2/2d$, $2/\gamma$)")
    else:
        ax.loglog(gamma, cols["dt_predicted"], "-", label="predicted")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel(r"max stable $\Delta t$")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, out_path)
    return {"xscale": "log", "yscale": "log", "points": len(gamma),
            "path": str(out_path)}


def plot_gamma_sweep(csv_path, out_path):
    """Error versus gamma * dx^2; unstable runs marked along the top edge."""
    meta, cols = read_manifest_csv(csv_path)
    require_columns(cols, ("gamma_dx2", "max_err"), csv_path)
    g = cols["gamma_dx2"]
    err = cols["max_err"]
    stable = np.isfinite(err)

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(g[stable], err[stable], "o-", label="stable")
    if np.any(~stable):
        top = err[stable].max() * 5 if stable.any() else 1.0
        ax.semilogy(g[~stable], np.full((~stable).sum(), top), "x",
                    color="crimson", label="unstable")
    ax.set_xlabel(r"$\gamma \Delta x^2$")
    ax.set_ylabel("max error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    _save(fig, out_path)
    return {"yscale": "log", "n_stable": int(stable.sum()),
            "n_unstable": int((~stable).sum()), "path": str(out_path)}


def plot_surface_scatter(vtk_path, out_path, field=None):
    """3D point cloud colored by one point scalar field."""
    pts, scalars = read_vtk_points(vtk_path)
    if not scalars:
        raise ValueError(f"{vtk_path}: no point scalars to color by")
    if field is None:
        field = next(iter(scalars))
    if field not in scalars:
        raise KeyError(f"{vtk_path}: no scalar field {field!r}")
    vals = scalars[field]

    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="3d")
    sc = ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], c=vals, s=4,
                    cmap="viridis")
    fig.colorbar(sc, ax=ax, shrink=0.7, label=field)
    ax.set_box_aspect((1, 1, 1))
    _save(fig, out_path)
    return {"field": field, "points": len(pts),
            "vmin": float(vals.min()), "vmax": float(vals.max()),
            "path": str(out_path)}
