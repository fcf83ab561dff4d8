"""Figures from experiment CSVs: per-estimator mean curves with ±1 std bands."""

from plotkit.bands import Band, SchemaError, load_bands, load_summary
from plotkit.render import PlotSpec, render

__all__ = ["Band", "PlotSpec", "SchemaError", "load_bands", "load_summary", "render"]

__version__ = "0.1.0"
