"""Matplotlib renderers for the CLI report commands (file output only)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import BucketBreakdown, CorrelationMatrix, GroupProfile


def _finish(fig, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_correlation_heatmap(matrix: CorrelationMatrix, path: Path | str) -> Path:
    values = np.array(matrix.values, dtype=float)
    n = len(matrix.labels)
    fig, ax = plt.subplots(figsize=(1.0 + 0.7 * n, 0.8 + 0.7 * n))
    image = ax.imshow(values, vmin=-1.0, vmax=1.0, cmap="Blues")
    ax.set_xticks(range(n), matrix.labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(n), matrix.labels, fontsize=8)
    for i in range(n):
        for j in range(n):
            cell = values[i, j]
            text = "-" if math.isnan(cell) else f"{cell:.2f}"
            ax.text(j, i, text, ha="center", va="center", fontsize=7)
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_title("Correlation of location factors and store counts")
    return _finish(fig, path)


def save_overlap_bars(rows: Sequence[tuple[str, float]], path: Path | str) -> Path:
    labels = [label for label, _ in rows]
    percents = [pct for _, pct in rows]
    fig, ax = plt.subplots(figsize=(1.5 + 0.9 * len(rows), 3.5))
    bars = ax.bar(labels, percents, color="#4878a8")
    ax.bar_label(bars, fmt="%.1f")
    ax.set_ylim(0, 105)
    ax.set_ylabel("stores on fulfilling sites [%]")
    ax.set_title("Overlap of stores and recommended sites")
    return _finish(fig, path)


def save_bucket_chart(
    series: Mapping[str, BucketBreakdown], path: Path | str, metric_label: str
) -> Path:
    """Grouped bars: mean metric per population bucket, one group per series."""
    first = next(iter(series.values()))
    bucket_labels = [
        f"{int(b.lower):,}-" + ("" if math.isinf(b.upper) else f"{int(b.upper):,}")
        for b in first.buckets
    ]
    n_buckets = len(bucket_labels)
    n_series = len(series)
    width = 0.8 / max(n_series, 1)
    fig, ax = plt.subplots(figsize=(2.0 + 1.2 * n_buckets, 4.0))
    for k, (label, breakdown) in enumerate(series.items()):
        xs = [i + k * width for i in range(n_buckets)]
        ys = [b.mean if b.mean is not None else 0.0 for b in breakdown.buckets]
        ax.bar(xs, ys, width=width, label=label)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(n_buckets)], bucket_labels)
    ax.set_xlabel("inhabitants")
    ax.set_ylabel(metric_label)
    ax.set_title(f"{metric_label} grouped by population")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def save_group_chart(profiles: Sequence[GroupProfile], path: Path | str) -> Path:
    """Per-group mean purchasing-power index and unemployment rate."""
    labels = [p.label for p in profiles]
    index_means = [p.mean_power_index if p.mean_power_index is not None else 0.0 for p in profiles]
    unemployment = [p.mean_unemployment if p.mean_unemployment is not None else 0.0 for p in profiles]
    xs = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(2.0 + 1.0 * len(labels), 4.0))
    ax.bar(xs - 0.2, index_means, width=0.4, color="#4878a8", label="purchasing-power index")
    ax.set_ylabel("purchasing-power index")
    twin = ax.twinx()
    twin.bar(xs + 0.2, unemployment, width=0.4, color="#d1605e", label="unemployment rate")
    twin.set_ylabel("unemployment rate [%]")
    ax.set_xticks(xs, labels, rotation=30, ha="right", fontsize=8)
    handles1, names1 = ax.get_legend_handles_labels()
    handles2, names2 = twin.get_legend_handles_labels()
    ax.legend(handles1 + handles2, names1 + names2, fontsize=8)
    ax.set_title("Group means by supermarket chain")
    return _finish(fig, path)


def save_score_bars(
    rows: Sequence[tuple[str, float]], path: Path | str, limit: int = 20
) -> Path:
    rows = list(rows)[:limit]
    labels = [site for site, _ in rows]
    scores = [score for _, score in rows]
    fig, ax = plt.subplots(figsize=(6.0, 1.0 + 0.3 * len(rows)))
    ax.barh(range(len(rows)), scores, color="#4878a8")
    ax.set_yticks(range(len(rows)), labels, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.set_xlabel("score")
    ax.set_title("Top ranked sites")
    return _finish(fig, path)
