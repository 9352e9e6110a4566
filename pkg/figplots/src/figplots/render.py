"""Plot kinds: population heatmap, metric curves, fidelity markers, Wigner panel.

Rendering reads the emitted files only and never mutates them; re-rendering
with the same inputs reproduces the same figure.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm, TwoSlopeNorm

from .io import MissingColumnError, TimeSeries, load_timeseries, load_wigner, require_columns

__all__ = ["PlotJob", "render", "PLOT_KINDS"]

PLOT_KINDS = ("heatmap", "curves", "fidelity", "wigner")


@dataclass
class PlotJob:
    kind: str
    inputs: list
    out: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind '{self.kind}'; choose from {PLOT_KINDS}")
        if not self.inputs:
            raise ValueError("at least one input file is required")


def _time_axis(ts: TimeSeries):
    t = ts.column("t")
    tau = ts.tau
    if tau:
        return t / tau, "t / tau"
    return t, "t"


def _population_matrix(ts: TimeSeries):
    cols = ts.columns_matching("p_")
    if not cols:
        raise MissingColumnError("p_0", ts.path)
    cols.sort(key=lambda name: int(name.split("_")[1]))
    for expected, name in enumerate(cols):
        if int(name.split("_")[1]) != expected:
            raise MissingColumnError(f"p_{expected}", ts.path)
    return np.stack([ts.column(name) for name in cols], axis=0)


def _render_heatmap(job: PlotJob, ax):
    ts = load_timeseries(job.inputs[0])
    require_columns(ts, ["t"])
    pops = _population_matrix(ts)
    t, t_label = _time_axis(ts)
    floor = float(job.options.get("floor", 1e-9))
    clipped = np.clip(pops, floor, None)
    mesh = ax.pcolormesh(t, np.arange(pops.shape[0]), clipped,
                         norm=LogNorm(vmin=floor, vmax=max(clipped.max(), 10 * floor)),
                         cmap="magma", shading="nearest")
    ax.set_xlabel(t_label)
    ax.set_ylabel("photon number n")
    ax.figure.colorbar(mesh, ax=ax, label="population")
    ax.set_title(job.options.get("title", f"populations: {ts.label}"))


_DEFAULT_CURVE_PREFIXES = ("td_initial", "coh_k", "combcoh_k")


def _curve_columns(ts: TimeSeries, requested):
    if requested:
        require_columns(ts, requested)
        return list(requested)
    found = [name for name in ts.header
             if any(name == p or name.startswith(p) for p in _DEFAULT_CURVE_PREFIXES)]
    if not found:
        raise MissingColumnError("td_initial", ts.path)
    return found


def _render_curves(job: PlotJob, ax):
    requested = job.options.get("columns")
    for path in job.inputs:
        ts = load_timeseries(path)
        require_columns(ts, ["t"])
        t, t_label = _time_axis(ts)
        for name in _curve_columns(ts, requested):
            y = ts.column(name)
            keep = ~np.isnan(y)
            label = f"{ts.label}: {name}" if len(job.inputs) > 1 else name
            ax.plot(t[keep], y[keep], lw=1.2, label=label)
        ax.set_xlabel(t_label)
    ax.set_ylabel(job.options.get("ylabel", "value"))
    ax.legend(fontsize=8, frameon=False)
    ax.set_title(job.options.get("title", "metrics"))


def _render_fidelity(job: PlotJob, ax):
    requested = job.options.get("columns")
    for path in job.inputs:
        ts = load_timeseries(path)
        require_columns(ts, ["t"])
        names = requested or ts.columns_matching("fid_sqrt_")
        if requested:
            require_columns(ts, names)
        if not names:
            raise MissingColumnError("fid_sqrt_*", ts.path)
        t, t_label = _time_axis(ts)
        for name in names:
            y = ts.column(name)
            keep = ~np.isnan(y)
            label = name.replace("fid_sqrt_", "")
            if len(job.inputs) > 1:
                label = f"{ts.label}: {label}"
            ax.plot(t[keep], y[keep], marker="o", ms=2.5, lw=0.8, label=label)
        ax.set_xlabel(t_label)
    ax.set_ylabel("fidelity (amplitude convention)")
    ax.set_ylim(job.options.get("ymin", 0.0), 1.02)
    ax.legend(fontsize=8, frameon=False)
    ax.set_title(job.options.get("title", "target fidelities at Kerr-period multiples"))


def _render_wigner(job: PlotJob, ax):
    grid, xs, ps = load_wigner(job.inputs[0])
    peak = float(np.max(np.abs(grid))) or 1.0
    mesh = ax.pcolormesh(xs, ps, grid, cmap="RdBu_r",
                         norm=TwoSlopeNorm(vcenter=0.0, vmin=-peak, vmax=peak),
                         shading="nearest")
    ax.set_xlabel("Re alpha")
    ax.set_ylabel("Im alpha")
    ax.set_aspect("equal")
    ax.figure.colorbar(mesh, ax=ax, label="W")
    ax.set_title(job.options.get("title", "Wigner function"))


_RENDERERS = {
    "heatmap": _render_heatmap,
    "curves": _render_curves,
    "fidelity": _render_fidelity,
    "wigner": _render_wigner,
}


def render(job: PlotJob) -> str:
    """Render the job to its output path and return that path."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2), dpi=130)
    try:
        _RENDERERS[job.kind](job, ax)
        fig.tight_layout()
        fig.savefig(job.out)
    finally:
        plt.close(fig)
    return job.out
