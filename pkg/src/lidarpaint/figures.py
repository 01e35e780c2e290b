"""Figure rendering for distance-bin reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import ID_TO_CLASS
from .report import BINS, DistanceBinReport


def _bin_labels():
    return [f"[{lo:g}, {hi:g})" if hi != float("inf") else f"{lo:g}+" for lo, hi in BINS]


def render_report_figure(report: DistanceBinReport, path) -> None:
    """Two-panel bar chart: points per box and painted-foreground fraction,
    grouped by distance bin, one bar per class."""
    classes = [c for c in report.classes if c != 0] or list(report.classes)
    has_fg = any(r.foreground_fraction is not None for r in report.rows)
    fig, axes = plt.subplots(1, 2 if has_fg else 1, figsize=(10 if has_fg else 6, 4))
    axes = np.atleast_1d(axes)

    x = np.arange(len(BINS))
    width = 0.8 / max(len(classes), 1)
    for k, cid in enumerate(classes):
        vals = [report.cell(bi, cid).mean_points_per_box for bi in range(len(BINS))]
        axes[0].bar(x + k * width, vals, width, label=ID_TO_CLASS.get(cid, f"class {cid}"))
    axes[0].set_xticks(x + 0.4 - width / 2)
    axes[0].set_xticklabels(_bin_labels())
    axes[0].set_xlabel("distance bin (m)")
    axes[0].set_ylabel("mean points per box")
    axes[0].set_title("Point coverage by distance")
    axes[0].legend(fontsize=8)

    if has_fg:
        for k, cid in enumerate(classes):
            vals = [
                (report.cell(bi, cid).foreground_fraction or 0.0) for bi in range(len(BINS))
            ]
            axes[1].bar(x + k * width, vals, width, label=ID_TO_CLASS.get(cid, f"class {cid}"))
        axes[1].set_xticks(x + 0.4 - width / 2)
        axes[1].set_xticklabels(_bin_labels())
        axes[1].set_xlabel("distance bin (m)")
        axes[1].set_ylabel("painted foreground fraction")
        axes[1].set_title("Semantic coverage by distance")
        axes[1].legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
