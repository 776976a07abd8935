"""Figure rendering for sweep summary tables.

Input is the sweep summary CSV produced by the clustering experiment CLI:
header ``eps,n,mean_rand,frac_perfect,mean_min_lambda``, one row per
(eps, n) cell.  This package reads that schema directly and shares no code
with the producer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["SummaryTable", "read_summary", "render_rand_figure", "render_lambda_figure"]

_COLUMNS = ["eps", "n", "mean_rand", "frac_perfect", "mean_min_lambda"]


class SchemaError(ValueError):
    """Summary file does not match the expected sweep schema."""


@dataclass
class SummaryTable:
    """Columnar view of the sweep summary rows."""

    eps: np.ndarray
    n: np.ndarray
    mean_rand: np.ndarray
    frac_perfect: np.ndarray
    mean_min_lambda: np.ndarray

    def __len__(self) -> int:
        return self.eps.size


def read_summary(path: str | Path) -> SummaryTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file")
        missing = [c for c in _COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        idx = [header.index(c) for c in _COLUMNS]
        rows = [[row[i] for i in idx] for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cols = list(zip(*rows))
    return SummaryTable(
        eps=np.array([float(v) for v in cols[0]]),
        n=np.array([int(v) for v in cols[1]]),
        mean_rand=np.array([float(v) for v in cols[2]]),
        frac_perfect=np.array([float(v) for v in cols[3]]),
        mean_min_lambda=np.array([float(v) for v in cols[4]]),
    )


def render_rand_figure(summary: SummaryTable, out_path: str | Path) -> None:
    """Two panels vs gap depth: mean accuracy index and fraction of perfect
    recoveries, one line per sample size."""
    if np.unique(summary.eps).size < 2:
        raise ValueError("need at least two distinct eps values")
    fig, (ax_rand, ax_perfect) = plt.subplots(1, 2, figsize=(9.0, 3.6), sharex=True)
    for n in np.unique(summary.n):
        sel = summary.n == n
        order = np.argsort(summary.eps[sel])
        eps = summary.eps[sel][order]
        ax_rand.plot(eps, summary.mean_rand[sel][order], marker="o", label=f"n = {n}")
        ax_perfect.plot(eps, summary.frac_perfect[sel][order], marker="o", label=f"n = {n}")
    ax_rand.set_xlabel("gap depth")
    ax_rand.set_ylabel("mean local accuracy index")
    ax_perfect.set_xlabel("gap depth")
    ax_perfect.set_ylabel("fraction of perfect recoveries")
    ax_perfect.set_ylim(-0.05, 1.05)
    ax_rand.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def fit_log_trend(n: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares a + c * ln(n); returns (a, c)."""
    design = np.column_stack([np.ones(n.size), np.log(n.astype(float))])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(coef[0]), float(coef[1])


def render_lambda_figure(summary: SummaryTable, eps_fixed: float, out_path: str | Path) -> float:
    """Smallest best-index threshold vs sample size at one gap depth.

    Log-x axis with the fitted a + c ln(n) trend overlaid; the fitted slope
    is reported in the caption and returned.
    """
    sel = summary.eps == eps_fixed
    if not sel.any():
        raise ValueError(f"no rows at eps = {eps_fixed:g}")
    n = summary.n[sel]
    lam = summary.mean_min_lambda[sel]
    if np.unique(n).size < 2:
        raise ValueError(f"need at least two distinct n values at eps = {eps_fixed:g}")
    order = np.argsort(n)
    n, lam = n[order], lam[order]
    intercept, slope = fit_log_trend(n, lam)
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(n, lam, marker="o", linestyle="none", label="mean minimal threshold")
    n_grid = np.geomspace(n.min(), n.max(), 64)
    ax.plot(n_grid, intercept + slope * np.log(n_grid), linestyle="--", label="log trend")
    ax.set_xscale("log")
    ax.set_xlabel("sample size n (log scale)")
    ax.set_ylabel("mean minimal threshold at best index")
    ax.set_title(f"gap depth {eps_fixed:g}: fitted slope {slope:.3f} per ln n")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return slope
