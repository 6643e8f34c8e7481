"""Figure rendering for the report paths; files only, no interactive windows."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dimension import CoverReport, DimensionSummary
from .simulate import EmpiricalMeasure

_DPI = 150


def render_measure(measure: EmpiricalMeasure, path: str, title: str = "") -> None:
    """Support histogram (d=1, log-x when the support spans decades) or
    scatter (d=2)."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if measure.d == 1:
        x = measure.points[:, 0]
        lo, hi = float(x.min()), float(x.max())
        if lo > 0 and hi / max(lo, 1e-300) > 1e3:
            bins = np.logspace(math.log10(lo), math.log10(hi), 200)
            ax.set_xscale("log")
        else:
            bins = 200
        ax.hist(x, bins=bins, weights=measure.weights, color="#336699")
        ax.set_xlabel("x")
        ax.set_ylabel("mass")
    else:
        ax.scatter(measure.points[:, 0], measure.points[:, 1], s=1, alpha=0.3,
                   c="#336699", linewidths=0)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_aspect("equal", adjustable="datalim")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_dimension(summary: DimensionSummary, path: str, title: str = "") -> None:
    """Histogram of per-center slopes with the median marked."""
    slopes = [r.slope for r in summary.records if not r.discarded]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.hist(slopes, bins=min(40, max(8, len(slopes) // 4)), color="#669933")
    ax.axvline(summary.median, color="k", linestyle="--",
               label=f"median = {summary.median:.4f}")
    ax.axvspan(summary.q10, summary.q90, color="k", alpha=0.08, label="q10..q90")
    ax.set_xlabel("local dimension slope")
    ax.set_ylabel("centers")
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_cover(report: CoverReport, path: str, title: str = "") -> None:
    """log sum(diam^t) against t, with the critical exponent marked."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(report.t_grid, report.log_sums, color="#993333")
    ax.axhline(0.0, color="k", linewidth=0.8)
    if not math.isnan(report.critical_exponent):
        ax.axvline(report.critical_exponent, color="k", linestyle="--",
                   label=f"critical t = {report.critical_exponent:.4f}")
        ax.legend(frameon=False)
    ax.set_xlabel("t")
    ax.set_ylabel("log sum(diam^t)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
