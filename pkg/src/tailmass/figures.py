"""Render report tables to figure files (PNG/PDF/SVG via the Agg backend).

Each report kind gets a dedicated renderer keyed off ``report.kind``; kinds
without one fall back to a generic column plot.  Rendering never requires a
display: the Agg backend is selected before pyplot is imported.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .reporting import ExperimentReport  # noqa: E402

_FIGSIZE = (6.4, 4.2)
_DPI = 150
_ACCENT = "#1f5fa8"  # estimates
_TRUTH = "#c23b22"  # true/reference values
_BASELINE = "#6d6d6d"  # competing baselines
_BAND_ALPHA = 0.25


def _new_axes():
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _render_curve(report: ExperimentReport):
    fig, ax = _new_axes()
    gammas = [row["gamma"] for row in report.rows]
    zetas = [row["zeta_hat"] for row in report.rows]
    if len(gammas) > 1:
        ax.step(gammas, zetas, where="post", color=_ACCENT)
    ax.plot(gammas, zetas, "o", color=_ACCENT)
    ax.set_xlabel("threshold")
    ax.set_ylabel("estimated tail mass")
    ax.set_title("Conservative tail-mass estimates")
    return fig


def _render_convergence(report: ExperimentReport):
    fig, ax = _new_axes()
    rows = report.rows
    for gamma_star in sorted({row["gamma_star"] for row in rows}):
        sub = sorted(
            (row for row in rows if row["gamma_star"] == gamma_star),
            key=lambda row: row["n"],
        )
        ns = [row["n"] for row in sub]
        med = [row["median"] for row in sub]
        lo = [row["lo90"] for row in sub]
        hi = [row["hi90"] for row in sub]
        (line,) = ax.plot(ns, med, "o-", label=f"effect size {gamma_star:g}")
        ax.fill_between(ns, lo, hi, color=line.get_color(), alpha=_BAND_ALPHA)
    zeta_star = report.params.get("zeta_star")
    if zeta_star is not None:
        ax.axhline(zeta_star, color=_TRUTH, linestyle="--", label="true tail mass")
    ax.set_xscale("log")
    ax.set_xlabel("sample size")
    ax.set_ylabel("estimated tail mass at 0")
    ax.set_title("Estimate vs. sample size (median, 90% bootstrap band)")
    ax.legend()
    return fig


def _render_heatmap(report: ExperimentReport):
    zetas = sorted({row["zeta_star"] for row in report.rows})
    gammas = sorted({row["gamma_star"] for row in report.rows})
    grid = np.full((len(zetas), len(gammas)), np.nan)
    for row in report.rows:
        i = zetas.index(row["zeta_star"])
        j = gammas.index(row["gamma_star"])
        grid[i, j] = row["detect_prob"]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    image = ax.imshow(
        grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0, cmap="viridis"
    )
    ax.set_xticks(range(len(gammas)), [f"{g:g}" for g in gammas])
    ax.set_yticks(range(len(zetas)), [f"{z:g}" for z in zetas])
    ax.set_xlabel("true effect size")
    ax.set_ylabel("true tail mass")
    ax.set_title("Probability of detecting at least half the tail mass")
    fig.colorbar(image, ax=ax, label="detection frequency")
    return fig


def _render_conservativeness(report: ExperimentReport):
    fig, ax = _new_axes()
    excesses = [row["max_excess"] for row in report.rows]
    ax.hist(excesses, bins=30, color=_ACCENT)
    ax.axvline(0.0, color=_TRUTH, linestyle="--", label="overestimation boundary")
    rate = report.summary.get("overestimate_rate")
    title = "Worst estimate-minus-truth gap per trial"
    if rate is not None:
        title += f" (overestimation rate {rate:.3f})"
    ax.set_xlabel("max over thresholds of estimate - truth")
    ax.set_ylabel("trials")
    ax.set_title(title)
    ax.legend()
    return fig


def _render_beta_mixture(report: ExperimentReport):
    fig, ax = _new_axes()
    gammas = [row["gamma"] for row in report.rows]
    ax.plot(
        gammas,
        [row["zeta_hat"] for row in report.rows],
        "o-",
        color=_ACCENT,
        label="conservative estimate",
    )
    ax.plot(
        gammas,
        [row["zeta_true"] for row in report.rows],
        "--",
        color=_TRUTH,
        label="true tail mass",
    )
    ax.plot(
        gammas,
        [row["fwer_fraction"] for row in report.rows],
        ":",
        color=_BASELINE,
        label="per-hypothesis rejection fraction",
    )
    ax.set_xlabel("threshold")
    ax.set_ylabel("tail mass")
    ax.set_title("Estimates vs. truth on a spike-plus-Beta mixture")
    ax.legend()
    return fig


def _render_npmle_weights(report: ExperimentReport):
    fig, ax = _new_axes()
    support = np.array([row["support"] for row in report.rows])
    weights = np.array([row["weight"] for row in report.rows])
    width = 0.9 * np.min(np.diff(support)) if support.size > 1 else 0.1
    ax.bar(support, weights, width=width, color=_ACCENT)
    ax.set_xlabel("mean value")
    ax.set_ylabel("estimated weight")
    ax.set_title("Maximum-likelihood mixing distribution (grid)")
    return fig


def _render_generic(report: ExperimentReport):
    fig, ax = _new_axes()
    rows = report.rows
    numeric = [
        key
        for key in rows[0]
        if all(isinstance(row[key], (int, float)) and not isinstance(row[key], bool) for row in rows)
    ]
    if len(rows) > 1 and len(numeric) > 1:
        x = [row[numeric[0]] for row in rows]
        for key in numeric[1:]:
            ax.plot(x, [row[key] for row in rows], "o-", label=key)
        ax.set_xlabel(numeric[0])
        ax.legend()
    else:
        keys = numeric
        values = [rows[0][key] for key in keys]
        ax.bar(range(len(keys)), values, color=_ACCENT)
        ax.set_xticks(range(len(keys)), keys, rotation=30, ha="right")
    ax.set_title(report.kind.replace("_", " "))
    return fig


_RENDERERS = {
    "estimate": _render_curve,
    "curve": _render_curve,
    "fwer": _render_curve,
    "convergence": _render_convergence,
    "detection_heatmap": _render_heatmap,
    "conservativeness": _render_conservativeness,
    "beta_mixture": _render_beta_mixture,
    "npmle_weights": _render_npmle_weights,
    "npmle_plugin": _render_curve,
}


def render_report(report: ExperimentReport, path: str | Path) -> Path:
    """Draw the report's figure and save it to ``path`` (format by suffix)."""
    if not report.rows:
        raise ValueError("report has no rows to plot")
    renderer = _RENDERERS.get(report.kind, _render_generic)
    fig = renderer(report)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
