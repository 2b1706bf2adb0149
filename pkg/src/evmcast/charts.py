"""Matplotlib figure rendering for the report path.

All charts are written as SVG with a fixed hash salt and no Date
metadata, so repeated runs with the same inputs produce byte-identical
files (the CLI determinism contract depends on this).
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_RC = {
    "svg.hashsalt": "evmcast",
    "svg.fonttype": "none",  # keep labels as text nodes: smaller, greppable
    "figure.figsize": (8.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _sparse_ticks(labels, max_ticks: int = 12):
    n = len(labels)
    step = max(1, (n + max_ticks - 1) // max_ticks)
    positions = list(range(0, n, step))
    return positions, [labels[i] for i in positions]


def _draw_annotations(ax, annotations, labels):
    if not annotations:
        return
    index = {label: i for i, label in enumerate(labels)}
    for period, text in annotations:
        if period in index:
            x = index[period]
            ax.axvline(x, color="#777777", linestyle="--", linewidth=0.8)
            ax.annotate(text, xy=(x, 1.0), xycoords=("data", "axes fraction"),
                        ha="left", va="top", fontsize=8, rotation=90, color="#555555")


def line_chart(path, title, ylabel, series, period_labels, annotations=None) -> None:
    """series: iterable of (label, x_positions, values)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for k, (label, x, y) in enumerate(series):
            ax.plot(x, y, label=label, color=_COLORS[k % len(_COLORS)], linewidth=1.6)
        positions, ticks = _sparse_ticks(period_labels)
        ax.set_xticks(positions)
        ax.set_xticklabels(ticks, rotation=45, ha="right")
        ax.set_title(title)
        ax.set_ylabel(ylabel)
        ax.legend(loc="best")
        _draw_annotations(ax, annotations, period_labels)
        fig.tight_layout()
        _save(fig, path)


def bar_chart(path, title, ylabel, labels, values) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        bars = ax.bar(range(len(labels)), values,
                      color=[_COLORS[i % len(_COLORS)] for i in range(len(labels))])
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels)
        ax.set_title(title)
        ax.set_ylabel(ylabel)
        for rect, value in zip(bars, values):
            ax.annotate(f"{value:.4g}", xy=(rect.get_x() + rect.get_width() / 2, rect.get_height()),
                        ha="center", va="bottom", fontsize=8)
        fig.tight_layout()
        _save(fig, path)


def hbar_chart(path, title, xlabel, labels, values) -> None:
    """Horizontal bars, first label on top."""
    with plt.rc_context(_RC):
        height = max(3.0, 0.4 * len(labels) + 1.2)
        fig, ax = plt.subplots(figsize=(7.0, height))
        pos = range(len(labels) - 1, -1, -1)
        ax.barh(list(pos), values, color=_COLORS[0])
        ax.set_yticks(list(pos))
        ax.set_yticklabels(labels)
        ax.set_title(title)
        ax.set_xlabel(xlabel)
        fig.tight_layout()
        _save(fig, path)
