"""SVG figures.  Output bytes are reproducible: fixed hash salt, no date stamp."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "phshape", "svg.fonttype": "path", "path.simplify": False}


def _save(fig, path) -> None:
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def plot_fcurve(fc, fit=None, path="fcurve.svg", title: str = "") -> None:
    """Log-log step plot of F with the fitted line over its window."""
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        if len(fc.sizes):
            ax.step(fc.sizes, fc.counts, where="post", color="k", lw=1, label="F(x)")
        if fit is not None:
            lo, hi = fit.window
            x = np.geomspace(lo, hi, 50)
            ax.plot(x, np.exp(fit.intercept) * x ** -fit.exponent, "r--", lw=1.5,
                    label=f"d = {fit.exponent:.3f}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("size x")
        ax.set_ylabel("F(x)")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
    _save(fig, path)


def plot_points(points, path="points.svg", title: str = "") -> None:
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.scatter(points.sizes, points.aspects, s=2, c="k")
        ax.set_xscale("log")
        ax.set_xlabel("size x")
        ax.set_ylabel("aspect y")
        ax.set_ylim(0, np.pi / 2 + 0.05)
        if title:
            ax.set_title(title)
        fig.tight_layout()
    _save(fig, path)


def plot_aspect_chart(chart, path="aspects.svg", title: str = "") -> None:
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        lo, hi = chart.edges[:-1], chart.edges[1:]
        ratios = np.nan_to_num(chart.ratios, nan=0.0)
        ax.bar(lo, ratios, width=hi - lo, align="edge", color="0.6", edgecolor="k")
        ax.axhline(1.0, color="r", lw=1)
        ax.set_xlabel("aspect")
        ax.set_ylabel("ratio of proportions")
        if title:
            ax.set_title(title)
        fig.tight_layout()
    _save(fig, path)
