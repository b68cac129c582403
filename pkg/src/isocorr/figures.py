"""Matplotlib renderings of the report data, written next to the CSVs.

Every function takes already-computed rows (the same data that lands in the
delimited outputs) and writes a PNG.  Rendering is deterministic: fixed
figure geometry, fixed dpi, no timestamps, so report directories can be
compared byte for byte across runs.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

DPI = 120
FIGSIZE = (7.0, 4.5)


def _finish(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return path


def render_histogram(
    bins: list[tuple[float, float, int]],
    path: Path,
    title: str,
    xlabel: str,
    overlay_normal: tuple[float, float] | None = None,
) -> Path:
    """Bar chart of (bin_left, bin_right, count) rows, optional Normal overlay."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    lefts = [b[0] for b in bins]
    widths = [b[1] - b[0] for b in bins]
    counts = [b[2] for b in bins]
    ax.bar(lefts, counts, width=widths, align="edge", color="#4878cf",
           edgecolor="white", linewidth=0.4)
    if overlay_normal is not None:
        mean, sd = overlay_normal
        total = sum(counts)
        width = widths[0] if widths else 1.0
        lo, hi = lefts[0], lefts[-1] + widths[-1]
        xs = [lo + (hi - lo) * i / 400 for i in range(401)]
        pdf = [
            total * width * math.exp(-0.5 * ((x - mean) / sd) ** 2)
            / (sd * math.sqrt(2 * math.pi))
            for x in xs
        ]
        ax.plot(xs, pdf, color="#d65f5f", linewidth=1.6,
                label=f"Normal({mean:.3g}, {sd:.3g})")
        ax.legend()
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    ax.set_title(title)
    return _finish(fig, path)


def render_nstar_scatter(
    points: list[tuple[int, float]],
    curve_rows: list[tuple[int, float, float, float]],
    fit_range: tuple[int, int] | None,
    path: Path,
) -> Path:
    """Scatter of per-trial (n, n_star) with the model overlays.

    ``curve_rows`` holds (n, iso, factor, ols) with nan for a missing OLS
    line; the OLS overlay is drawn only inside its fit window.
    """
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.scatter(
        [p[0] for p in points], [p[1] for p in points],
        s=6, color="#555555", alpha=0.45, linewidths=0, label="trials",
    )
    ns = [r[0] for r in curve_rows]
    ax.plot(ns, [r[1] for r in curve_rows], color="#ee854a", linewidth=1.8,
            label="common correlation")
    ax.plot(ns, [r[2] for r in curve_rows], color="#6acc64", linewidth=1.8,
            label="n / k factors")
    if fit_range is not None:
        window = [r for r in curve_rows if fit_range[0] <= r[0] <= fit_range[1]]
        ols = [r for r in window if not math.isnan(r[3])]
        if ols:
            ax.plot([r[0] for r in ols], [r[3] for r in ols], color="#d65f5f",
                    linewidth=1.8, label="large-n least squares")
    ax.set_xlabel("portfolio size n")
    ax.set_ylabel("effective degrees of freedom")
    ax.set_title("effective degrees of freedom vs portfolio size")
    ax.legend()
    return _finish(fig, path)


def render_risk_curves(rows: list[tuple[float, int, float, float, float]], path: Path) -> Path:
    """Common-factor and residual variance shares against portfolio size.

    ``rows`` holds (rho, n, v_s, v_r, ratio); one line pair per rho, log-x.
    """
    fig, ax = plt.subplots(figsize=FIGSIZE)
    rhos = sorted({r[0] for r in rows})
    cmap = plt.get_cmap("viridis")
    for k, rho in enumerate(rhos):
        sub = [r for r in rows if r[0] == rho]
        ns = [r[1] for r in sub]
        share_s = [r[2] / (r[2] + r[3]) for r in sub]
        share_r = [r[3] / (r[2] + r[3]) for r in sub]
        color = cmap(0.15 + 0.7 * k / max(1, len(rhos) - 1))
        ax.plot(ns, share_s, color=color, linewidth=1.6, label=f"common, rho={rho:g}")
        ax.plot(ns, share_r, color=color, linewidth=1.6, linestyle="--",
                label=f"residual, rho={rho:g}")
    ax.set_xscale("log")
    ax.set_xlabel("portfolio size n")
    ax.set_ylabel("share of portfolio variance")
    ax.set_title("variance carried by the common factor vs the residual space")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def render_centering_curves(rows: list[tuple[float, int, float]], path: Path) -> Path:
    """Mean-score suppression factor against portfolio size, one line per rho."""
    fig, ax = plt.subplots(figsize=FIGSIZE)
    rhos = sorted({r[0] for r in rows})
    cmap = plt.get_cmap("viridis")
    for k, rho in enumerate(rhos):
        sub = [r for r in rows if r[0] == rho]
        color = cmap(0.15 + 0.7 * k / max(1, len(rhos) - 1))
        ax.plot([r[1] for r in sub], [r[2] for r in sub], color=color,
                linewidth=1.6, label=f"rho={rho:g}")
    ax.set_xscale("log")
    ax.set_xlabel("portfolio size n")
    ax.set_ylabel("weight on mean-score subtraction")
    ax.set_title("relative-value tilt of the optimal portfolio")
    ax.legend(fontsize=8)
    return _finish(fig, path)
