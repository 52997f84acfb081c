"""Contour-plot renderer for the sle-densities/v1 CSV grid format."""

from .render import GridData, PlotSpec, RenderError, load_grid, render

__version__ = "0.1.0"

__all__ = ["GridData", "PlotSpec", "RenderError", "load_grid", "render"]
