"""Figure rendering for the report path.

Each renderer takes an experiment report (or transform estimate), draws one
matplotlib figure, and writes it to a file next to the other outputs.  The
Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .transforms import TransformEstimate  # noqa: E402
from .validation import ExperimentReport  # noqa: E402

_DPI = 150


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def consistency_figure(report: ExperimentReport, path: Path) -> Path:
    series = report.extras["series"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.loglog(series["n"], series["gamma_sup"], "o-", label="arrivals pgf")
    ax1.loglog(series["n"], series["lambda_err"], "s--", label="rate")
    ax1.set_xlabel("observations n")
    ax1.set_ylabel("sup error")
    ax1.set_title("posterior-mean errors")
    ax1.legend()
    ax2.loglog(series["n"], series["g_sup"], "o-", color="tab:red")
    ax2.set_xlabel("observations n")
    ax2.set_ylabel("sup error")
    ax2.set_title(f"service LST error on [0, {report.parameters['g_grid_max']}]")
    fig.suptitle(f"consistency ({report.parameters['service']})")
    return _save(fig, path)


def bvm_figure(report: ExperimentReport, path: Path) -> Path:
    scaled = report.extras["scaled"]
    emp = report.extras["emp_cov"]
    theo = report.extras["h_cov"]
    rate_scaled = report.extras["rate_scaled"]
    z_grid = report.extras["z_grid"]
    fig, (ax1, ax2, ax3) = plt.subplots(1, 3, figsize=(12, 3.5))
    idx = np.arange(emp.size)
    ax1.bar(idx - 0.18, emp.ravel(), width=0.36, label="empirical")
    ax1.bar(idx + 0.18, theo.ravel(), width=0.36, label="limit")
    ax1.set_xticks(idx)
    ax1.set_xticklabels(
        [f"{u:g},{v:g}" for u in z_grid for v in z_grid], rotation=45, fontsize=7
    )
    ax1.set_title("pgf covariance entries")
    ax1.legend(fontsize=8)
    ax2.hist(scaled[:, 0], bins=40, density=True, alpha=0.6)
    xs = np.linspace(scaled[:, 0].min(), scaled[:, 0].max(), 200)
    sd = scaled[:, 0].std()
    ax2.plot(xs, np.exp(-0.5 * (xs / sd) ** 2) / (sd * np.sqrt(2 * np.pi)), "r-")
    ax2.set_title(f"rescaled pgf draws at z={z_grid[0]:g}")
    ax3.hist(rate_scaled, bins=40, density=True, alpha=0.6)
    xs = np.linspace(rate_scaled.min(), rate_scaled.max(), 200)
    sd = rate_scaled.std()
    ax3.plot(xs, np.exp(-0.5 * (xs / sd) ** 2) / (sd * np.sqrt(2 * np.pi)), "r-")
    ax3.set_title("rescaled rate draws")
    fig.suptitle("posterior normality")
    return _save(fig, path)


def pi_check_figure(report: ExperimentReport, path: Path) -> Path:
    z = report.extras["z"]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(z, report.extras["estimate"], label="estimated stationary pgf")
    ax.plot(z, report.extras["empirical"], "--", label="empirical mark pgf")
    ax.set_xlabel("z")
    ax.set_ylabel("pgf")
    ax.set_title(f"stationary-law check (sup gap {report.metrics['sup_gap']:.2e})")
    ax.legend()
    return _save(fig, path)


def oracle_figure(report: ExperimentReport, path: Path) -> Path:
    labels = sorted(
        key.removeprefix("max_abs_err.")
        for key in report.metrics
        if key.startswith("max_abs_err.")
    )
    errors = [max(report.metrics[f"max_abs_err.{lb}"], 1e-18) for lb in labels]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(labels, errors)
    ax.set_yscale("log")
    ax.set_ylabel("max |quadrature - closed form|")
    ax.set_title("arrival-law oracle agreement")
    return _save(fig, path)


def tau_sweep_figure(rows, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    names = [r.property for r in rows]
    ax.bar(names, [r.checked for r in rows], color="tab:blue", label="pairs checked")
    bad = [r.violations for r in rows]
    if any(bad):
        ax.bar(names, bad, color="tab:red", label="violations")
    ax.set_yscale("log")
    ax.set_ylabel("count")
    ax.set_title("exhaustive combinatorial checks")
    ax.legend(fontsize=8)
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right")
    return _save(fig, path)


def transform_figure(estimate: TransformEstimate, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    if estimate.kind == "rho":
        ax.bar(["utilization"], [estimate.values[0]])
        ax.set_ylim(0, 1)
    else:
        ax.plot(estimate.grid, estimate.values, "o-")
        ax.set_xlabel("argument")
        ax.set_ylabel("value")
    ax.set_title(f"transform {estimate.kind}")
    return _save(fig, path)
