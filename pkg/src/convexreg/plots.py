"""Figure rendering for the CLI report paths.

Each helper writes a single PNG next to the delimited output.  Figures
are diagnostics; the CSV files remain the primary, byte-stable outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .sim import RateFit, RiskCurve

__all__ = [
    "save_fit_figure",
    "save_risk_figure",
    "save_packing_figure",
    "save_misspec_figure",
]

_RC = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _save(fig, path: str) -> None:
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def save_fit_figure(path: str, x, y, fitted) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(x, y, "o", ms=4, alpha=0.6, label="data")
        ax.plot(x, fitted, "-", lw=2, label="convex fit")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.legend()
        _save(fig, path)


def save_risk_figure(path: str, curve: RiskCurve, fit: RateFit | None) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ns = curve.ns
        means = curve.means
        ax.errorbar(ns, means, yerr=2.0 * curve.std_errors, fmt="o-", capsize=3, label="risk")
        if fit is not None:
            ax.plot(
                ns,
                np.exp(fit.intercept) * ns ** fit.slope,
                "--",
                label=f"slope {fit.slope:.3f}",
            )
        ax.set_xscale("log")
        if np.any(means > 0.0):
            ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("mean squared loss")
        ax.legend()
        _save(fig, path)


def save_packing_figure(path: str, points, slope: float) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        x = np.array([p[0] for p in points])
        logw = np.array([p[1] for p in points])
        ax.plot(x, np.log(logw), "o", label="packings")
        coeff = np.polyfit(x, np.log(logw), 1)
        ax.plot(x, coeff[0] * x + coeff[1], "--", label=f"slope {slope:.3f}")
        ax.set_xlabel("log(1/eps)")
        ax.set_ylabel("log log |W|")
        ax.legend()
        _save(fig, path)


def save_misspec_figure(path: str, x, f0_values, projected) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(x, f0_values, "o", ms=4, alpha=0.6, label="truth")
        ax.plot(x, projected, "-", lw=2, label="convex projection")
        ax.set_xlabel("x")
        ax.set_ylabel("value")
        ax.legend()
        _save(fig, path)
