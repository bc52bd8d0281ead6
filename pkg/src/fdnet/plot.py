"""SVG line plots drawn from sweep CSV files only."""

from __future__ import annotations

import io
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import read_csv  # noqa: E402


class PlotError(ValueError):
    """Bad column selection or an empty dataset."""


def _float(text: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan


def emit_plot(csv_text: str, cols: list[str], x: str | None = None, log_x: bool | None = None,
              log_y: bool = False, title: str = "") -> str:
    """Plot ``cols`` against the first CSV column (or ``x``) and return SVG text.

    Columns with a matching ``<name>_ci`` column get error bars. The x-axis is
    logarithmic by default for density sweeps.
    """
    header, rows = read_csv(csv_text)
    if not rows:
        raise PlotError("dataset has no rows")
    if not cols:
        raise PlotError("no columns selected; available: " + ", ".join(header))
    x = x or header[0]
    unknown = [c for c in [x, *cols] if c not in header]
    if unknown:
        raise PlotError(f"unknown column(s) {', '.join(unknown)}; available: {', '.join(header)}")
    if log_x is None:
        log_x = x == "lambda"
    xs = [_float(r[x]) for r in rows]

    matplotlib.rcParams["svg.hashsalt"] = "fdnet"
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for c in cols:
        ys = [_float(r[c]) for r in rows]
        style = dict(marker="o", markersize=4, label=c)
        if len(rows) == 1:
            style["linestyle"] = "none"
        if c + "_ci" in header:
            err = [_float(r[c + "_ci"]) for r in rows]
            ax.errorbar(xs, ys, yerr=err, capsize=2, **style)
        else:
            ax.plot(xs, ys, **style)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.grid(True, which="both", linewidth=0.3)
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()
