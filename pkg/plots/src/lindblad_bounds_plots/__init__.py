"""Figure scripts over the bootstrap-bound CSV schemas.

This package never recomputes physics: it is a pure reader of the CSV
files produced by the bounds package, limited to 1/N rescaling and
explicitly non-rigorous polynomial guide curves.
"""

from .figures import (FigureSpec, SchemaMismatch, plot_bounds_vs_N,
                      plot_bounds_vs_omega, plot_gap_regions,
                      plot_navigator_profile)

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "SchemaMismatch",
    "plot_bounds_vs_N",
    "plot_bounds_vs_omega",
    "plot_gap_regions",
    "plot_navigator_profile",
]
