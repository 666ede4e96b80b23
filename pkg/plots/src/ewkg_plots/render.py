"""Figure rendering for the evolution code's CSV outputs.

Five plot kinds, one figure each, written as raster images.  Inputs are the
CSV files the run CLI emits; a schema mismatch fails with a message naming
the first missing column.  Rendering is deterministic: fixed figure size,
axis limits derived from the data, no timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

PLOT_KINDS = ("energy", "flux_decay", "nonconcentration", "convergence",
              "axis_slopes")
LOG_FLOOR = 1e-14

FIGSIZE = (6.4, 4.2)
DPI = 120


class SchemaError(ValueError):
    """Input CSV does not carry the columns the plot kind needs."""


@dataclass(frozen=True)
class PlotJob:
    input_csv: Path
    plot_kind: str
    output_image: Path


def read_csv(path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    if data.ndim != 2 or data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return {name: data[:, i] for i, name in enumerate(header)}


def require(cols, names, kind):
    for name in names:
        if name not in cols:
            raise SchemaError(f"missing column {name!r} required by {kind!r}")


def fit_order(x, y):
    """Least-squares slope of log y against log x, dropping round-off floor."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    mask = (y > LOG_FLOOR) & (x > 0)
    if np.count_nonzero(mask) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[mask]), np.log(y[mask]), 1)[0])


def _new_axes(title, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def _plot_energy(cols, ax):
    require(cols, ("time", "E_total", "E_cone"), "energy")
    ax.plot(cols["time"], cols["E_total"], label="total energy")
    ax.plot(cols["time"], cols["E_cone"], label="cone energy")
    lo = min(0.0, cols["E_total"].min(), cols["E_cone"].min())
    hi = max(cols["E_total"].max(), cols["E_cone"].max(), LOG_FLOOR)
    ax.set_ylim(lo - 0.05 * hi, 1.1 * hi)
    ax.legend()


def _plot_flux_decay(cols, ax):
    require(cols, ("time", "flux_PT"), "flux_decay")
    ax.plot(cols["time"], cols["flux_PT"], label="accumulated mantle flux")
    hi = max(cols["flux_PT"].max(), LOG_FLOOR)
    ax.set_ylim(min(0.0, cols["flux_PT"].min()) - 0.05 * hi, 1.1 * hi)
    ax.legend()


def _plot_nonconcentration(cols, ax):
    names = ("potential_cone", "E_ext", "kin_rate", "radial_rate")
    require(cols, ("time",) + names, "nonconcentration")
    for name in names:
        ax.plot(cols["time"], cols[name], label=name)
    ax.legend()


def _plot_convergence(cols, ax):
    require(cols, ("n_cells",), "convergence")
    n = cols["n_cells"]
    annotations = []
    for name, series in cols.items():
        if name == "n_cells" or np.all(series <= LOG_FLOOR):
            continue
        order = -fit_order(n, series)
        annotations.append(f"{name}: order {order:.2f}")
        ax.loglog(n, np.maximum(series, LOG_FLOOR), marker="o", label=name)
    ax.legend(fontsize=8)
    ax.text(0.02, 0.02, "\n".join(annotations), transform=ax.transAxes,
            fontsize=8, va="bottom")


def _plot_axis_slopes(cols, ax):
    require(cols, ("time", "max_dev_r", "slope_r", "slope_ru", "slope_rv"),
            "axis_slopes")
    for name in ("slope_r", "slope_ru", "slope_rv"):
        ax.plot(cols["time"], cols[name], label=name)
    med = float(np.nanmedian(cols["slope_r"][cols["slope_r"] != 0.0])) \
        if np.any(cols["slope_r"] != 0.0) else float("nan")
    ax.axhline(2.0, color="gray", lw=0.8, ls="--")
    ax.text(0.02, 0.02, f"median |r - R| slope: {med:.2f}",
            transform=ax.transAxes, fontsize=9, va="bottom")
    ax.legend()


_RENDERERS = {
    "energy": (_plot_energy, "energies", "time", "energy"),
    "flux_decay": (_plot_flux_decay, "cone flux decay", "time", "flux"),
    "nonconcentration": (_plot_nonconcentration, "non-concentration series",
                         "time", "value"),
    "convergence": (_plot_convergence, "grid convergence", "n_cells", "residual"),
    "axis_slopes": (_plot_axis_slopes, "axis geometry slopes", "slice time v",
                    "log-log slope"),
}


def render(job: PlotJob) -> Path:
    """Render one job; returns the written image path."""
    if job.plot_kind not in PLOT_KINDS:
        raise SchemaError(f"unknown plot kind {job.plot_kind!r}")
    cols = read_csv(job.input_csv)
    fn, title, xl, yl = _RENDERERS[job.plot_kind]
    fig, ax = _new_axes(title, xl, yl)
    try:
        fn(cols, ax)
        out = Path(job.output_image)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
    finally:
        plt.close(fig)
    return Path(job.output_image)
