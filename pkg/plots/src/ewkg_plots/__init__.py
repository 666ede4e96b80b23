"""Batch rendering of diagnostic figures from the evolution code's CSVs."""

from .render import PLOT_KINDS, PlotJob, SchemaError, render

__all__ = ["PLOT_KINDS", "PlotJob", "SchemaError", "render"]

__version__ = "0.1.0"
