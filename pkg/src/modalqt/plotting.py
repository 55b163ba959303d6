"""Figures of possibility and probability tables, rendered off-screen."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .render import format_fraction, outcome_labels
from .resolve import ProbabilityTable
from .tables import PossibilityTable


def _offsets(sizes):
    return np.concatenate([[0], np.cumsum(sizes)])


def table_figure(t: PossibilityTable, probs: ProbabilityTable | None = None, title: str = "") -> Figure:
    """One grid for the whole table; marks drawn as crosses, or shaded by probability."""
    sc = t.scenario
    rows = _offsets([n for _, n in sc.rows])
    cols = _offsets([n for _, n in sc.cols])
    values = np.zeros((rows[-1], cols[-1]))
    marks = np.zeros_like(values, dtype=bool)
    for i, j, a, c in t.cells():
        marks[rows[i] + a, cols[j] + c] = t[i, j, a, c]
        if probs is not None:
            values[rows[i] + a, cols[j] + c] = float(probs[i, j, a, c])

    fig = Figure(figsize=(1.0 + 0.55 * cols[-1], 1.0 + 0.55 * rows[-1]))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot()
    if probs is not None:
        im = ax.imshow(values, cmap="Blues", vmin=0, vmax=1)
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    else:
        ax.imshow(marks, cmap="Greys", vmin=0, vmax=4)
    for (r, c), marked in np.ndenumerate(marks):
        if probs is not None:
            i = int(np.searchsorted(rows, r, side="right")) - 1
            j = int(np.searchsorted(cols, c, side="right")) - 1
            text = format_fraction(probs[i, j, r - rows[i], c - cols[j]])
            ax.text(c, r, text, ha="center", va="center", fontsize=8, color="black" if values[r, c] < 0.6 else "white")
        elif marked:
            ax.text(c, r, "×", ha="center", va="center", fontsize=14)
    for y in rows[1:-1]:
        ax.axhline(y - 0.5, color="black", lw=1.5)
    for x in cols[1:-1]:
        ax.axvline(x - 0.5, color="black", lw=1.5)
    ax.set_xticks(range(cols[-1]))
    ax.set_xticklabels([f"{label}{o}" for label, n in sc.cols for o in outcome_labels(n)])
    ax.set_yticks(range(rows[-1]))
    ax.set_yticklabels([f"{label}{o}" for label, n in sc.rows for o in outcome_labels(n)])
    ax.xaxis.tick_top()
    ax.tick_params(length=0)
    if title:
        ax.set_title(title, pad=24)
    fig.tight_layout()
    return fig


def save_table_figure(
    t: PossibilityTable, path: str | Path, probs: ProbabilityTable | None = None, title: str = ""
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table_figure(t, probs, title).savefig(path, dpi=120)
    return path
