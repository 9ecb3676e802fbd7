"""Figure rendering: entropy heatmaps and line cuts as self-contained SVG.

Heatmaps use a monotone perceptual colormap (viridis), linear color scale
saturated at the 99th percentile by default (the entropy diverges
logarithmically toward phase boundaries), an optional log scale, hatched
boundary cells, and the analytic emergent-symmetry lines of the selected
model overlaid as vector paths.  Output is byte-deterministic: the SVG hash
salt is pinned and the creation date is stripped.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm, Normalize
from matplotlib.patches import Rectangle

from .errors import BadDataset
from .scan import ScanDataset

_SVG_RC = {"svg.hashsalt": "emsym", "svg.fonttype": "path"}

_AXIS_LABELS = {
    "g_plus": r"$g_+$",
    "g_minus": r"$g_-$",
    "gamma_x": r"$\gamma_x$",
    "gamma_y": r"$\gamma_y$",
    "field_h": r"$h$",
    "omega0": r"$\omega_0$",
    "omega_spin": r"$\Omega$",
}


@dataclass(frozen=True)
class RenderStyle:
    cmap: str = "viridis"
    log_scale: bool = False
    vmax_percentile: float = 99.0
    show_lines: bool = True
    title: str | None = None
    figsize: tuple = (6.0, 4.8)


def _cell_edges(values: np.ndarray) -> np.ndarray:
    mids = 0.5 * (values[1:] + values[:-1])
    first = values[0] - (mids[0] - values[0])
    last = values[-1] + (values[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _overlay_lines(ax, dataset: ScanDataset):
    cfg = dataset.config
    x0, x1 = ax.get_xlim()
    y0, y1 = ax.get_ylim()
    xs = np.linspace(x0, x1, 801)
    model = cfg.model
    if model in ("landau", "dicke", "dicke_lattice"):
        if model == "dicke_lattice":
            from .lattice import LatticeParams, critical_coupling
            from .dicke import DickeParams
            from .scan import build_geometry
            lp = LatticeParams(
                DickeParams.from_couplings(cfg.params["omega0"], cfg.params["omega_spin"], 1.0, 0.0),
                cfg.params["hop_j"], build_geometry(cfg.geometry))
            gc = critical_coupling(lp)
        else:
            gc = 1.0
        gc2 = gc * gc
        # conserving hyperbola g+ g- = gc^2 inside the broken region
        safe_xs = np.where(np.abs(xs) > 1e-9, xs, np.nan)
        for sign in (1.0, -1.0):
            branch = sign * gc2 / safe_xs
            keep = (np.maximum(np.abs(xs), np.abs(branch)) > gc) & (branch >= y0) & (branch <= y1)
            ax.plot(np.where(keep, xs, np.nan), np.where(keep, branch, np.nan),
                    color="white", lw=1.2, ls="-" if sign > 0 else "--")
        # conserving diagonal in the normal square
        diag = xs[(np.abs(xs) <= gc) & (xs >= y0) & (xs <= y1)]
        ax.plot(diag, diag, color="white", lw=1.2)
        for val in (gc, -gc):
            ax.axvline(val, color="0.8", lw=0.6, ls=":")
            ax.axhline(val, color="0.8", lw=0.6, ls=":")
    elif model == "lmg":
        h = cfg.params["field_h"]
        branch = np.where(xs > 1e-9, h * h / xs, np.nan)
        keep = (np.maximum(xs, branch) > h) & (branch >= y0) & (branch <= y1)
        ax.plot(np.where(keep, xs, np.nan), np.where(keep, branch, np.nan),
                color="magenta", lw=1.2, ls="--")
        ax.axvline(h, color="0.8", lw=0.6, ls=":")
        ax.axhline(h, color="0.8", lw=0.6, ls=":")
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)


def _to_svg(fig) -> str:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue().decode("utf-8")


def render_heatmap(dataset: ScanDataset, style: RenderStyle = RenderStyle()) -> str:
    """Entropy heatmap of a 2-axis dataset as an SVG string."""
    if dataset.axis2 is None:
        raise BadDataset("heatmap needs a 2-axis dataset")
    if not dataset.records:
        raise BadDataset("empty dataset")
    entropy = dataset.entropy_grid()
    flags = dataset.flag_grid()
    finite = entropy[np.isfinite(entropy)]
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=style.figsize)
        xe = _cell_edges(dataset.axis1)
        ye = _cell_edges(dataset.axis2)
        if finite.size == 0:
            norm = Normalize(vmin=0.0, vmax=1.0)
        elif style.log_scale:
            positive = finite[finite > 0]
            vmin = positive.min() if positive.size else 1e-12
            vmax = max(finite.max(), vmin * 10)
            norm = LogNorm(vmin=vmin, vmax=vmax)
        else:
            vmax = np.percentile(finite, style.vmax_percentile)
            if vmax <= 0:
                vmax = max(finite.max(), 1e-12)
            norm = Normalize(vmin=0.0, vmax=vmax)
        masked = np.ma.masked_invalid(entropy.T)
        mesh = ax.pcolormesh(xe, ye, masked, norm=norm, cmap=style.cmap,
                             shading="flat", rasterized=False)
        cbar = fig.colorbar(mesh, ax=ax)
        cbar.set_label("entanglement entropy (bits)")
        # hatch flagged cells (boundaries, Goldstone lines)
        for i, j in zip(*np.nonzero(flags)):
            ax.add_patch(Rectangle(
                (xe[i], ye[j]), xe[i + 1] - xe[i], ye[j + 1] - ye[j],
                facecolor="none", edgecolor="0.55", hatch="////", lw=0.0))
        ax.set_xlabel(_AXIS_LABELS.get(dataset.config.axes[0].name,
                                       dataset.config.axes[0].name))
        ax.set_ylabel(_AXIS_LABELS.get(dataset.config.axes[1].name,
                                       dataset.config.axes[1].name))
        if style.show_lines:
            _overlay_lines(ax, dataset)
        if style.title:
            ax.set_title(style.title)
        return _to_svg(fig)


def render_lineplot(dataset: ScanDataset, style: RenderStyle = RenderStyle()) -> str:
    """Entropy along a 1-axis dataset as an SVG string; flagged cells marked."""
    if dataset.axis2 is not None:
        raise BadDataset("line plot needs a 1-axis dataset")
    if not dataset.records:
        raise BadDataset("empty dataset")
    xs = dataset.axis1
    ys = dataset.entropy_grid()
    flags = dataset.flag_grid()
    with matplotlib.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=style.figsize)
        ax.plot(xs, ys, color="tab:cyan", lw=1.4)
        if flags.any():
            ax.plot(xs[flags], np.zeros(flags.sum()), linestyle="none",
                    marker="x", color="0.4", label="flagged")
            ax.legend(frameon=False)
        if style.log_scale:
            ax.set_yscale("log")
        ax.set_xlabel(_AXIS_LABELS.get(dataset.config.axes[0].name,
                                       dataset.config.axes[0].name))
        ax.set_ylabel("entanglement entropy (bits)")
        if style.title:
            ax.set_title(style.title)
        return _to_svg(fig)


def render_dataset(dataset: ScanDataset, style: RenderStyle = RenderStyle()) -> str:
    if dataset.axis2 is None:
        return render_lineplot(dataset, style)
    return render_heatmap(dataset, style)
