"""figurekit: post-hoc publication figures from simulation metrics CSVs."""

from .io import SchemaError, load_style, read_metrics, read_series
from .plots import (BAR_METRICS, plot_bars, plot_coverage_vs_time,
                    plot_pdr_vs_rate, read_embedded_values)

__version__ = "0.1.0"

__all__ = [
    "BAR_METRICS", "SchemaError", "load_style", "plot_bars",
    "plot_coverage_vs_time", "plot_pdr_vs_rate", "read_embedded_values",
    "read_metrics", "read_series", "__version__",
]
