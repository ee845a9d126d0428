"""TSV emission for evaluation outputs (headerless, LF line endings)."""

from __future__ import annotations

from pathlib import Path

from .curves import CurveReport
from .precision import PrecisionReport
from .stats import ListeningStats


def write_curves_tsv(report: CurveReport, path: str | Path) -> None:
    """Rows: j <TAB> model <TAB> mean_cos."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for model in sorted(report.curves):
            for j, value in enumerate(report.curves[model], start=1):
                fh.write(f"{j}\t{model}\t{value!r}\n")


def write_precision_tsv(report: PrecisionReport, path: str | Path) -> None:
    """Rows: model <TAB> metric <TAB> value."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for model in sorted(report.values):
            for metric, value in report.values[model].items():
                fh.write(f"{model}\t{metric}\t{value!r}\n")


def write_stats_tsv(stats: ListeningStats, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for name, box in (("all_pairs", stats.all_pairs), ("subsequent_pairs", stats.subsequent_pairs)):
            fh.write(f"{name}\tq1\t{box.q1!r}\n")
            fh.write(f"{name}\tmedian\t{box.median!r}\n")
            fh.write(f"{name}\tq3\t{box.q3!r}\n")
            fh.write(f"{name}\twhisker_low\t{box.whisker_low!r}\n")
            fh.write(f"{name}\twhisker_high\t{box.whisker_high!r}\n")
            fh.write(f"{name}\tcount\t{box.count}\n")
        fh.write(f"transitions\tmedian\t{stats.median_transitions!r}\n")


def write_stats_summary(stats: ListeningStats, path: str | Path) -> None:
    lines = [
        "Listening-history distance statistics",
        "",
        f"All pairs       median={stats.all_pairs.median:.4f} "
        f"IQR=[{stats.all_pairs.q1:.4f}, {stats.all_pairs.q3:.4f}] "
        f"whiskers=[{stats.all_pairs.whisker_low:.4f}, {stats.all_pairs.whisker_high:.4f}] "
        f"n={stats.all_pairs.count}",
        f"Subsequent pairs median={stats.subsequent_pairs.median:.4f} "
        f"IQR=[{stats.subsequent_pairs.q1:.4f}, {stats.subsequent_pairs.q3:.4f}] "
        f"whiskers=[{stats.subsequent_pairs.whisker_low:.4f}, {stats.subsequent_pairs.whisker_high:.4f}] "
        f"n={stats.subsequent_pairs.count}",
        "",
        f"Median adjacent transitions with cosine distance > 1: "
        f"{stats.median_transitions:.1f} per sequence",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_loss_history(history, path: str | Path) -> None:
    """Rows: epoch <TAB> train_loss <TAB> valid_loss."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for epoch, train, valid in history:
            fh.write(f"{epoch}\t{train!r}\t{valid!r}\n")
