"""Figure rendering for orthotensor benchmark CSV output."""

from .render import PlotJob, curve_data, filter_rows, render
from .schema import CSV_FIELDS, BenchRow, SchemaError, load_rows

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "CSV_FIELDS",
    "PlotJob",
    "SchemaError",
    "curve_data",
    "filter_rows",
    "load_rows",
    "render",
]
