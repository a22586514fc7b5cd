"""Matplotlib rendering of report outputs (histogram bars, sweep scatter)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .phantom import SweepReport
from .volume import Histogram

# Strip the writer tag so a rerun produces byte-identical image files.
_SAVE_KWARGS = {"dpi": 120, "metadata": {"Software": None}}


def render_histogram(hist: Histogram, out_path: Path, title: str = "susceptibility histogram") -> None:
    centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(centers, hist.counts, width=hist.bin_width * 0.92, color="#4878cf")
    ax.axvline(0.0, color="k", linewidth=0.8)
    ax.set_xlabel("value (ppm)")
    ax.set_ylabel("voxel count")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)


def render_sweep(report: SweepReport, out_path: Path) -> None:
    assigned = np.asarray(report.assigned_ppm)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    lo = float(assigned.min())
    hi = float(assigned.max())
    ax.plot([lo, hi], [lo, hi], "k--", linewidth=0.8, label="identity")
    for method, measured in report.measured_ppm.items():
        reg = report.regression.get(method)
        label = method if reg is None else f"{method} (slope {reg.slope:.2f})"
        pts = ax.plot(assigned, measured, "o", markersize=4, label=label)
        if reg is not None:
            ax.plot(
                [lo, hi],
                [reg.slope * lo + reg.intercept, reg.slope * hi + reg.intercept],
                "-",
                linewidth=1.0,
                color=pts[0].get_color(),
            )
    ax.set_xlabel("assigned value (ppm)")
    ax.set_ylabel("measured ROI mean (ppm)")
    ax.set_title("assigned vs. measured susceptibility")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)
