"""Report figures for clustering sweep summaries."""

from .render import SummaryTable, fit_log_trend, read_summary, render_lambda_figure, render_rand_figure

__version__ = "0.1.0"

__all__ = [
    "SummaryTable",
    "fit_log_trend",
    "read_summary",
    "render_lambda_figure",
    "render_rand_figure",
]
