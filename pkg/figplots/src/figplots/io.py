"""Readers for the simulator's emitted files.

Only the files are shared with the simulator: time-series CSV (empty cells
mark metrics not defined at that snapshot), a JSON metadata sidecar, and the
long-format Wigner grid CSV.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EmptyInputError",
    "MissingColumnError",
    "TimeSeries",
    "load_timeseries",
    "load_wigner",
    "require_columns",
]


class EmptyInputError(ValueError):
    """CSV has a header but no data rows."""


class MissingColumnError(ValueError):
    """A column required by the plot kind is absent."""

    def __init__(self, column: str, path: str):
        self.column = column
        super().__init__(f"{path}: missing required column '{column}'")


@dataclass
class TimeSeries:
    path: str
    header: list
    data: np.ndarray  # (rows, cols), NaN where the cell was empty
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        if name not in self.header:
            raise MissingColumnError(name, self.path)
        return self.data[:, self.header.index(name)]

    def columns_matching(self, prefix: str) -> list:
        return [name for name in self.header if name.startswith(prefix)]

    @property
    def label(self) -> str:
        name = self.meta.get("scenario", {}).get("name")
        return name or os.path.splitext(os.path.basename(self.path))[0]

    @property
    def tau(self) -> float | None:
        params = self.meta.get("scenario", {}).get("params", {})
        if "tau_pi" in params:
            return float(params["tau_pi"]) * math.pi
        if "tau" in params:
            return float(params["tau"])
        return None


def _read_rows(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise EmptyInputError(f"{path}: file is empty")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def load_timeseries(path) -> TimeSeries:
    path = str(path)
    header, rows = _read_rows(path)
    if not rows:
        raise EmptyInputError(f"{path}: header-only CSV, nothing to plot")
    data = np.full((len(rows), len(header)), np.nan)
    for i, cells in enumerate(rows):
        if len(cells) != len(header):
            raise ValueError(f"{path}: row {i + 2} has {len(cells)} cells, header has {len(header)}")
        for j, cell in enumerate(cells):
            if cell != "":
                data[i, j] = float(cell)
    meta = {}
    meta_path = (path[:-4] if path.endswith(".csv") else path) + ".json"
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            meta = json.load(fh)
    return TimeSeries(path=path, header=header, data=data, meta=meta)


def load_wigner(path):
    """Long-format x,p,w grid -> (W[p, x], xs, ps)."""
    ts = load_timeseries(path)
    require_columns(ts, ["x", "p", "w"])
    xs = np.unique(ts.column("x"))
    ps = np.unique(ts.column("p"))
    grid = np.full((ps.size, xs.size), np.nan)
    xi = np.searchsorted(xs, ts.column("x"))
    pi = np.searchsorted(ps, ts.column("p"))
    grid[pi, xi] = ts.column("w")
    if np.any(np.isnan(grid)):
        raise ValueError(f"{path}: x,p samples do not form a full rectangular grid")
    return grid, xs, ps


def require_columns(ts: TimeSeries, names) -> None:
    for name in names:
        if name not in ts.header:
            raise MissingColumnError(name, ts.path)
