"""Parse sle-densities/v1 grid CSVs and render contour-plot PNGs.

The renderer consumes only the public CSV format (schema-tagged header plus
x,y,value rows); it has no dependency on the package that produced the
file.  Output is deterministic for a fixed input, spec, and matplotlib
version.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCHEMA_TAG = "sle-densities/v1"


class RenderError(Exception):
    """Malformed input or an unrenderable grid."""


@dataclass(frozen=True)
class GridData:
    kind: str
    kappa: float
    L: float
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # shape (ny, nx)


@dataclass(frozen=True)
class PlotSpec:
    input_csv: str
    output_png: str
    log_scale: bool = False
    levels: int = 30
    title: str = ""


def load_grid(path) -> GridData:
    """Read a grid CSV; refuse files without the schema tag."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.strip().split("\n") if ln]
    if not lines or not lines[0].startswith(f"# {SCHEMA_TAG} "):
        raise RenderError(f"{path} does not carry the {SCHEMA_TAG} header")
    try:
        fields = dict(part.split("=", 1) for part in lines[0][2:].split()[1:])
        kind = fields["kind"]
        kappa = float(fields["kappa"])
        length = float(fields["L"])
    except (KeyError, ValueError) as exc:
        raise RenderError(f"{path}: bad header fields") from exc
    try:
        rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]]
    except ValueError as exc:
        raise RenderError(f"{path}: malformed data row") from exc
    if any(len(r) != 3 for r in rows) or not rows:
        raise RenderError(f"{path}: rows must be x,y,value")
    xs = np.array(sorted({r[0] for r in rows}))
    ys = np.array(sorted({r[1] for r in rows}))
    if xs.size * ys.size != len(rows):
        raise RenderError(f"{path}: grid is not rectangular")
    values = np.full((ys.size, xs.size), np.nan)
    xi = {v: k for k, v in enumerate(xs)}
    yi = {v: k for k, v in enumerate(ys)}
    for x, y, v in rows:
        values[yi[y], xi[x]] = v
    return GridData(kind=kind, kappa=kappa, L=length, xs=xs, ys=ys, values=values)


def render(spec: PlotSpec) -> int:
    """Render the grid to a PNG contour plot; returns the NaN-cell count.

    Upper-half-plane orientation (y upward), anchors marked at +-L/2.
    """
    grid = load_grid(spec.input_csv)
    if grid.xs.size < 2 or grid.ys.size < 2:
        raise RenderError("grid too small to contour (need at least 2x2)")
    data = np.ma.masked_invalid(grid.values)
    nan_count = int(np.count_nonzero(~np.isfinite(grid.values)))
    if nan_count:
        warnings.warn(f"{nan_count} NaN cells masked", stacklevel=2)
    if spec.log_scale:
        nonpos = int(np.count_nonzero(data.filled(1.0) <= 0.0))
        if nonpos:
            warnings.warn(f"{nonpos} non-positive cells masked on log scale",
                          stacklevel=2)
        data = np.ma.log10(np.ma.masked_less_equal(data, 0.0))
    levels = max(2, int(spec.levels))
    title = spec.title or f"{grid.kind}, kappa={grid.kappa:g}, L={grid.L:g}"

    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=120)
    try:
        cs = ax.contourf(grid.xs, grid.ys, data, levels=levels, cmap="viridis")
        fig.colorbar(cs, ax=ax, label="log10 density" if spec.log_scale else "density")
        half = 0.5 * grid.L
        ax.plot([-half, half], [0.0, 0.0], marker="^", color="red",
                linestyle="none", markersize=7, clip_on=False)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_ylim(bottom=0.0)
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(spec.output_png, metadata={"Software": "plotkit"})
    finally:
        plt.close(fig)
    return nan_count
