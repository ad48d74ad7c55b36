"""Deterministic figure rendering from analysis CSV tables.

Figure kinds map one-to-one onto the analyze outputs:

- ``traces``:          traces_sample.csv   (per-realization traces + mean)
- ``recovery_vs_t``:   recovery_vs_t.csv   (survival fraction over time)
- ``recovery_vs_tau``: recovery_vs_tau.csv (final fraction vs threshold)
- ``heatmap``:         heatmap.csv         (final fraction over the grid)

Rendering is a pure function of the CSV contents and the spec: colors are a
fixed function of the disorder width, axis ranges are pinned per quantity,
and no timestamps or random salts enter the output files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "edgemem-plots"

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_KINDS = ("traces", "recovery_vs_t", "recovery_vs_tau", "heatmap")

#: Disorder widths are mapped to colors by value over this fixed range, so
#: the same delta gets the same color in every figure.
DELTA_COLOR_RANGE = (0.0, 4.0)

#: y-axis (and tau-axis) ranges per quantity family.
QUANTITY_RANGES = {
    "integrity": (0.0, 1.0),
    "coherent_info": (-2.0, 2.0),
}


class RenderError(RuntimeError):
    """Input table is missing or malformed."""


@dataclass(frozen=True)
class FigureSpec:
    input_path: str
    kind: str
    output_path: str
    image_format: str = "svg"
    quantity: str = "integrity"
    xlabel: str = ""
    ylabel: str = ""
    title: str = ""

    def __post_init__(self) -> None:
        if self.kind not in FIGURE_KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {FIGURE_KINDS}")
        if self.image_format not in ("svg", "png"):
            raise RenderError("format must be 'svg' or 'png'")
        if self.quantity not in QUANTITY_RANGES:
            raise RenderError(f"unknown quantity {self.quantity!r}")


def _read_table(path: str, required: tuple[str, ...]) -> tuple[list[str], list[list[str]]]:
    p = Path(path)
    if not p.exists():
        raise RenderError(f"input table {path} does not exist")
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    missing = [col for col in required if col not in header]
    if missing:
        raise RenderError(f"{path} is missing columns {missing}; header is {header}")
    return header, rows


def _delta_color(delta: float):
    lo, hi = DELTA_COLOR_RANGE
    return matplotlib.colormaps["viridis"]((delta - lo) / (hi - lo))


def _cell_label(j: float, delta: float) -> str:
    return f"J={j:g}, Δ={delta:g}"


def _save(fig, spec: FigureSpec) -> None:
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if spec.image_format == "svg" else {}
    fig.savefig(out, format=spec.image_format, metadata=metadata,
                bbox_inches="tight")
    plt.close(fig)


def _render_traces(spec: FigureSpec):
    header, rows = _read_table(spec.input_path, ("t", "mean"))
    t_idx = header.index("t")
    mean_idx = header.index("mean")
    trace_cols = [i for i, name in enumerate(header) if name.startswith("r")]
    t = np.array([float(r[t_idx]) for r in rows])
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for rank, col in enumerate(trace_cols):
        values = np.array([float(r[col]) for r in rows])
        shade = matplotlib.colormaps["winter"](
            rank / max(len(trace_cols) - 1, 1))
        ax.plot(t, values, color=shade, linewidth=0.8, alpha=0.7)
    mean = np.array([float(r[mean_idx]) for r in rows])
    ax.plot(t, mean, color="red", linewidth=1.8, label="average")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "sample traces")
    ax.set_ylim(*QUANTITY_RANGES[spec.quantity])
    ax.set_xlim(t.min(), t.max())
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="lower left", frameon=False)
    return fig


def _group_cells(header, rows):
    j_idx, d_idx = header.index("J"), header.index("delta")
    cells: dict[tuple[float, float], list[list[str]]] = {}
    for row in rows:
        cells.setdefault((float(row[j_idx]), float(row[d_idx])), []).append(row)
    return cells


_J_LINESTYLES = ("-", "--", "-.", ":")


def _render_recovery(spec: FigureSpec, x_column: str):
    header, rows = _read_table(spec.input_path,
                               ("quantity", "J", "delta", x_column, "fraction"))
    x_idx = header.index(x_column)
    f_idx = header.index("fraction")
    quantity = rows[0][header.index("quantity")] if rows else spec.quantity
    cells = _group_cells(header, rows)
    j_values = sorted({j for j, _ in cells})
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    for (j, delta), block in sorted(cells.items()):
        x = np.array([float(r[x_idx]) for r in block])
        y = np.array([float(r[f_idx]) for r in block])
        order = np.argsort(x)
        ax.plot(x[order], y[order], color=_delta_color(delta),
                linestyle=_J_LINESTYLES[j_values.index(j) % len(_J_LINESTYLES)],
                linewidth=1.4, label=_cell_label(j, delta))
    ax.set_ylim(0.0, 1.0)
    if x_column == "tau":
        lo, hi = QUANTITY_RANGES[
            "coherent_info" if quantity == "coherent_info" else "integrity"]
        ax.set_xlim(max(lo, 0.0), hi)
    ax.set_xlabel(spec.xlabel or x_column)
    ax.set_ylabel(spec.ylabel or "recovery fraction")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="best", frameon=False, fontsize=7)
    return fig


def _render_heatmap(spec: FigureSpec):
    header, rows = _read_table(spec.input_path, ("delta",))
    if len(header) < 2:
        raise RenderError("heatmap table needs at least one J column")
    j_values = [float(x) for x in header[1:]]
    deltas = [float(r[0]) for r in rows]
    grid = np.array([[float(x) for x in r[1:]] for r in rows])
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    mesh = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0,
                     cmap="viridis")
    ax.set_xticks(range(len(j_values)), [f"{j:g}" for j in j_values])
    ax.set_yticks(range(len(deltas)), [f"{d:g}" for d in deltas])
    ax.set_xlabel(spec.xlabel or "J")
    ax.set_ylabel(spec.ylabel or "Δ")
    if spec.title:
        ax.set_title(spec.title)
    fig.colorbar(mesh, ax=ax, label="recovery fraction")
    return fig


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path."""
    if spec.kind == "traces":
        fig = _render_traces(spec)
    elif spec.kind == "recovery_vs_t":
        fig = _render_recovery(spec, "t")
    elif spec.kind == "recovery_vs_tau":
        fig = _render_recovery(spec, "tau")
    else:
        fig = _render_heatmap(spec)
    _save(fig, spec)
    return spec.output_path
