"""Render the figure analogues from the CLI's delimited outputs.

Style mapping (the captions fix structure, not palettes): arms are blue
(right) and light-red dashed (left); contrast curves use solid lines for the
spin channel and dashed/dotted for the diamagnetic one, darker for the colder
temperature, one color per mass (heaviest first: black, red, blue, ...);
density maps shade dark to light as the loss grows, with the 1% contour in
white dashes and the gradient-cap curve in black.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402

from .spec import (  # noqa: E402
    CONTRAST_COLUMNS,
    DIPOLE_COLUMNS,
    OVERLAY_COLUMNS,
    SERIES_COLUMNS,
    FigureSpec,
    read_csv,
)

__all__ = ["render"]

_ARM_STYLE = {
    "R": dict(color="tab:blue", linestyle="-", label="right arm"),
    "L": dict(color="lightcoral", linestyle="--", label="left arm"),
}
_MASS_COLORS = ["black", "tab:red", "tab:blue", "tab:green", "tab:purple", "tab:orange"]


def render(spec: FigureSpec) -> Path:
    """Produce the image for one figure spec; returns the output path."""
    fn = {
        "fig3": _render_fig3,
        "fig4": _render_fig4,
        "fig5": _render_fig5,
        "fig6a": _render_fig6,
        "fig6b": _render_fig6,
        "fig6c": _render_fig6,
        "fig6d": _render_fig6,
        "dipole": _render_dipole,
    }[spec.figure]
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig = fn(spec)
    try:
        fig.savefig(out, dpi=int(spec.style.get("dpi", 150)))
    finally:
        plt.close(fig)
    return out


def _render_fig3(spec: FigureSpec):
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), constrained_layout=True)
    for ax, key, title in zip(axes, ("spin", "dia"), ("spin coupling", "diamagnetic coupling")):
        data = read_csv(spec.inputs[key], SERIES_COLUMNS)
        t = np.asarray(data["t"])
        for arm in ("R", "L"):
            n = np.asarray(data[f"n_{arm}"])
            scaled = n / n[0]
            ax.plot(t, scaled, lw=1.0, **_ARM_STYLE[arm])
            ax.axhline(scaled[-1], color=_ARM_STYLE[arm]["color"], ls=":", lw=0.8)
        ax.axhline(1.0, color="black", ls=":", lw=0.8, label="initial")
        ax.set_xlabel("t (s)")
        ax.set_ylabel("occupation / initial")
        ax.set_title(title)
    axes[0].legend(loc="best", fontsize=8)
    return fig


def _render_fig4(spec: FigureSpec):
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.2), constrained_layout=True)
    n_chunks = 40
    for ax, key, title in zip(axes, ("spin", "dia"), ("spin coupling", "diamagnetic coupling")):
        data = read_csv(spec.inputs[key], SERIES_COLUMNS)
        for arm in ("R", "L"):
            u = np.asarray(data[f"u_{arm}"])
            v = np.asarray(data[f"udot_{arm}"])
            # dimensionless axes: the first row is the characteristic widths
            u = u / u[0]
            v = v / v[0]
            style = dict(_ARM_STYLE[arm])
            label = style.pop("label")
            bounds = np.linspace(0, len(u) - 1, n_chunks + 1, dtype=int)
            for i, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
                alpha = 0.15 + 0.85 * (i + 1) / n_chunks  # early times faded
                ax.plot(u[lo : hi + 1], v[lo : hi + 1], alpha=alpha, lw=0.9,
                        label=label if i == n_chunks - 1 else None, **style)
        ax.set_xlabel("amplitude / width")
        ax.set_ylabel("velocity / width")
        ax.set_title(title)
        ax.set_aspect("equal", adjustable="datalim")
    axes[0].legend(loc="best", fontsize=8)
    return fig


def _curve_groups(data):
    rows = zip(data["channel"], data["M"], data["T"], data["delta_x"], data["neg_ln_c"])
    groups = {}
    for channel, mass, temp, dx, loss in rows:
        groups.setdefault((channel, mass, temp), []).append((dx, loss))
    return groups


def _render_fig5(spec: FigureSpec):
    data = read_csv(spec.inputs["curves"], CONTRAST_COLUMNS)
    groups = _curve_groups(data)
    masses = sorted({m for _, m, _ in groups}, reverse=True)
    temps = sorted({t for _, _, t in groups})
    fig, ax = plt.subplots(figsize=(6.4, 4.8), constrained_layout=True)
    for (channel, mass, temp), pts in sorted(
        groups.items(), key=lambda kv: (-kv[0][1], kv[0][2], kv[0][0])
    ):
        pts = sorted(pts)
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        cold = temps.index(temp) == 0
        style = {
            ("spin", True): "-",
            ("spin", False): "-",
            ("dia", True): "--",
            ("dia", False): ":",
        }[(channel, cold)]
        alpha = 1.0 if cold else 0.45 if channel == "spin" else 1.0
        color = _MASS_COLORS[masses.index(mass) % len(_MASS_COLORS)]
        ax.loglog(
            x, y, style, color=color, alpha=alpha, lw=1.3,
            label=f"{channel}, M={mass:g} kg, T={temp:g} K",
        )
    ax.set_xlabel("maximum separation (m)")
    ax.set_ylabel("-ln C")
    ax.legend(fontsize=7, loc="best")
    return fig


def _render_fig6(spec: FigureSpec):
    data = read_csv(spec.inputs["map"], CONTRAST_COLUMNS)
    x_key = "delta_x" if spec.figure in ("fig6a", "fig6b") else "M"
    xs = np.array(sorted(set(data[x_key])))
    ys = np.array(sorted(set(data["delta_t"])))
    z = np.full((len(ys), len(xs)), np.nan)
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    for xv, yv, loss in zip(data[x_key], data["delta_t"], data["neg_ln_c"]):
        z[yi[yv], xi[xv]] = loss
    fig, ax = plt.subplots(figsize=(5.6, 4.4), constrained_layout=True)
    positive = z[z > 0]
    vmax = positive.max()
    vmin = max(positive.min(), vmax * 1e-16)
    mesh = ax.pcolormesh(
        xs, ys, np.clip(z, vmin, None),
        norm=LogNorm(vmin=vmin, vmax=vmax),
        cmap=spec.style.get("cmap", "magma"),
        shading="nearest",
    )
    fig.colorbar(mesh, ax=ax, label="-ln C")
    overlay = read_csv(spec.inputs["overlay"], OVERLAY_COLUMNS)
    if spec.style.get("show_contour", True):
        if "loss_contour" not in overlay["kind"]:
            warnings.warn(f"{spec.figure}: overlay has no loss contour; map drawn without one")
        _plot_overlay(ax, overlay, "loss_contour", color="white", ls="--", lw=1.2,
                      label="1% loss")
    if spec.style.get("show_cap", True):
        _plot_overlay(ax, overlay, "gradient_cap", color="black", ls="-", lw=1.5,
                      label="gradient cap")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("maximum separation (m)" if x_key == "delta_x" else "mass (kg)")
    ax.set_ylabel("total duration (s)")
    ax.legend(fontsize=7, loc="upper right")
    return fig


def _plot_overlay(ax, overlay, kind, label, **style):
    rows = [
        (seg, x, y)
        for k, seg, x, y in zip(overlay["kind"], overlay["segment"], overlay["x"], overlay["y"])
        if k == kind
    ]
    if not rows:
        return
    for seg_id in sorted({seg for seg, _, _ in rows}):
        pts = [(x, y) for seg, x, y in rows if seg == seg_id]
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=label if seg_id == min(s for s, _, _ in rows) else None, **style)


def _render_dipole(spec: FigureSpec):
    data = read_csv(spec.inputs["estimate"], DIPOLE_COLUMNS)
    eta = np.asarray(data["eta_e"])
    pref = np.asarray(data["prefactor_sq"])
    loss = np.asarray(data["neg_ln_c"])
    slope = np.polyfit(np.log10(eta), np.log10(pref), 1)[0]
    fig, ax = plt.subplots(figsize=(5.6, 4.2), constrained_layout=True)
    ax.loglog(eta, pref, "o-", color="black", ms=3, lw=1.0, label="coupling prefactor")
    ax.set_xlabel("electric gradient (V/m$^2$)")
    ax.set_ylabel("squared coupling prefactor")
    ax2 = ax.twinx()
    ax2.loglog(eta, loss, "s--", color="tab:red", ms=3, lw=1.0, label="-ln C")
    ax2.set_ylabel("-ln C", color="tab:red")
    ax.set_title(f"fitted scaling exponent {slope:.3f}")
    handles, labels = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(handles + h2, labels + l2, fontsize=8, loc="upper left")
    return fig
