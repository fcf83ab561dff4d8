"""Figure rendering: one mean curve plus shaded ±1 std band per estimator."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotkit.bands import crosscheck_bands, load_bands, load_summary

# fixed hash salt keeps SVG ids reproducible across runs
matplotlib.rcParams["svg.hashsalt"] = "plotkit"

VECTOR_SUFFIXES = (".svg", ".pdf", ".eps")


@dataclass
class PlotSpec:
    """What to draw and where to put it.

    ``csv_paths`` may name several record files; ``series`` selects the
    estimator tags to draw. Vector output is the default: pick a raster
    format by using a raster suffix (.png) on ``out_path``.
    """

    csv_paths: list[str]
    series: list[str]
    out_path: str
    summary_path: str | None = None
    logx: bool = False
    logy: bool = False
    title: str = ""
    xlabel: str = "t"
    ylabel: str = "diameter"
    dpi: int = 150


def render(spec: PlotSpec) -> str:
    """Draw the figure and atomically (re)place the output file.

    Returns the output path. Inputs are only ever read. When a summary file
    is given, the recomputed band edges are verified against it before
    anything is drawn, and slope annotations are taken from it.
    """
    if not spec.series:
        raise ValueError("empty series selection: nothing to draw")
    bands = load_bands(spec.csv_paths, spec.series)
    if spec.summary_path:
        crosscheck_bands(bands, load_summary(spec.summary_path))

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for band in bands:
        label = band.estimator
        if band.slope is not None:
            label += f" (slope {band.slope:.2f})"
        ax.plot(band.t, band.mean, label=label, linewidth=1.6)
        ax.fill_between(band.t, band.lower_edge, band.upper_edge, alpha=0.25, linewidth=0)
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend()
    fig.tight_layout()

    out_dir = os.path.dirname(os.path.abspath(spec.out_path)) or "."
    suffix = os.path.splitext(spec.out_path)[1] or ".svg"
    fd, tmp = tempfile.mkstemp(suffix=suffix, dir=out_dir)
    os.close(fd)
    try:
        # scrub volatile metadata so identical inputs give identical bytes
        metadata = {"Date": None} if suffix == ".svg" else None
        fig.savefig(tmp, format=suffix.lstrip("."), dpi=spec.dpi, metadata=metadata)
        os.replace(tmp, spec.out_path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.unlink(tmp)
    return spec.out_path
