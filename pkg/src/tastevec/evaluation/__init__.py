"""Offline evaluation: distance curves, precision tables, corpus statistics."""

from .curves import CurveReport, backward_analysis, forward_analysis
from .precision import (
    STANDARD_METRICS,
    PrecisionReport,
    popularity_recommender,
    precision_at,
    precision_table,
    top_scoring_songs,
)
from .report import (
    write_curves_tsv,
    write_loss_history,
    write_precision_tsv,
    write_stats_summary,
    write_stats_tsv,
)
from .stats import BoxStats, ListeningStats, box_stats, listening_stats

__all__ = [
    "STANDARD_METRICS",
    "BoxStats",
    "CurveReport",
    "ListeningStats",
    "PrecisionReport",
    "backward_analysis",
    "box_stats",
    "forward_analysis",
    "listening_stats",
    "popularity_recommender",
    "precision_at",
    "precision_table",
    "top_scoring_songs",
    "write_curves_tsv",
    "write_loss_history",
    "write_precision_tsv",
    "write_stats_summary",
    "write_stats_tsv",
]
