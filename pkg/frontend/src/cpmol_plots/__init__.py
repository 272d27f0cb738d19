"""Plot generation from solver CSV/VTK artifacts."""

from .io import MissingColumn, read_manifest_csv, read_vtk_points
from .plots import (
    plot_convergence,
    plot_gamma_sweep,
    plot_stability,
    plot_surface_scatter,
)

__version__ = "0.1.0"

__all__ = [
    "MissingColumn",
    "read_manifest_csv",
    "read_vtk_points",
    "plot_convergence",
    "plot_stability",
    "plot_gamma_sweep",
    "plot_surface_scatter",
]
