"""Evaluation metrics and independent oracles for the clustering weights.

The metrics operate on ground-truth labels at a local scale: only pairs of
cluster members closer than the final bandwidth enter the score.  The Monte
Carlo helpers estimate population overlap coefficients directly from a
sampler, independently of the analytic formulas they are used to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import GeometryParams
from .core import BandwidthSchedule, awc_run
from .datagen import (
    GAP_LABEL,
    Dataset,
    ManifoldSpec,
    sample_circle_gap,
    sample_uniform_manifold,
)

__all__ = [
    "GapCoefficientEstimate",
    "PairClassification",
    "pair_classifications",
    "local_rand_index",
    "misclassification_rate",
    "mc_gap_coefficient",
    "lens_ratio_closed_form",
    "kl_null_vs_gap",
    "propagation_trial",
    "separation_trial",
]


def _eligible_pairs(data: Dataset, h_max: float):
    """Cluster-member pairs with 0 < dist < h_max, as (i, j, same_label)."""
    if data.labels is None:
        raise ValueError("ground-truth labels are required")
    labels = data.labels
    members = np.flatnonzero(labels != GAP_LABEL)
    pts = data.points[members]
    iu, ju = np.triu_indices(members.size, k=1)
    diff = pts[iu] - pts[ju]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    keep = (dist > 0.0) & (dist < h_max)
    iu, ju = members[iu[keep]], members[ju[keep]]
    return iu, ju, labels[iu] == labels[ju]


@dataclass(frozen=True)
class PairClassification:
    """One eligible pair seen as a binary classification instance.

    ``same_cluster`` is the ground-truth weight (same cluster vs different
    clusters), ``predicted`` the algorithm's weight, ``dist`` the pair
    distance; defined only for cluster-member pairs within the evaluation
    radius.
    """

    i: int
    j: int
    same_cluster: bool
    predicted: bool
    dist: float


def pair_classifications(weights, data: Dataset, h_max: float = 1.0) -> list[PairClassification]:
    """Materialize every eligible pair's (truth, prediction, distance)."""
    iu, ju, same = _eligible_pairs(data, h_max)
    dense = weights if isinstance(weights, np.ndarray) else weights.to_dense()
    diff = data.points[iu] - data.points[ju]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    return [
        PairClassification(int(a), int(b), bool(s), bool(dense[a, b]), float(d))
        for a, b, s, d in zip(iu, ju, same, dist)
    ]


def local_rand_index(weights, data: Dataset, h_max: float = 1.0) -> float:
    """Pairwise accuracy of the weights at a local scale.

    Over pairs of cluster members (gap-labeled points excluded) at distance
    in (0, h_max): a same-cluster pair counts when its weight is 1, a
    cross-cluster pair when its weight is 0.  ``weights`` may be a
    WeightMatrix or a dense boolean matrix.
    """
    iu, ju, same = _eligible_pairs(data, h_max)
    if iu.size == 0:
        raise ValueError("no eligible pair: all pairs are farther than h_max or gap-labeled")
    dense = weights if isinstance(weights, np.ndarray) else weights.to_dense()
    w = dense[iu, ju]
    correct = np.where(same, w, ~w)
    return float(correct.sum()) / float(iu.size)


def misclassification_rate(weights, data: Dataset, h_max: float = 1.0) -> float:
    """Fraction of eligible pairs with the wrong weight; the complement of
    the local accuracy index."""
    return 1.0 - local_rand_index(weights, data, h_max)


@dataclass
class GapCoefficientEstimate:
    """Monte Carlo estimate of the population overlap coefficient.

    q_hat is the intersection-over-union probability ratio, std_err its
    binomial standard error given the union count, z_hat the union
    probability itself.  ``degenerate`` flags union counts below 30, where
    the binomial approximation is unreliable.
    """

    q_hat: float
    std_err: float
    n_mc: int
    z_hat: float
    n_union: int
    degenerate: bool


def mc_gap_coefficient(
    generator: Callable[[int, int], np.ndarray],
    m1: np.ndarray,
    m2: np.ndarray,
    r: float,
    n_mc: int,
    seed: int,
) -> GapCoefficientEstimate:
    """Estimate P(both balls) / P(either ball) for balls of radius r at m1, m2.

    ``generator(n, seed)`` must return n i.i.d. sample points.  Sampling is
    done in one call, membership counting is vectorized.
    """
    if n_mc < 1000:
        raise ValueError("n_mc must be at least 1000")
    if r <= 0.0:
        raise ValueError("radius must be positive")
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    pts = np.asarray(generator(n_mc, seed), dtype=np.float64)
    d1 = np.sqrt(((pts - m1) ** 2).sum(axis=1))
    d2 = np.sqrt(((pts - m2) ** 2).sum(axis=1))
    in1 = d1 <= r
    in2 = d2 <= r
    n_union = int((in1 | in2).sum())
    n_inter = int((in1 & in2).sum())
    z_hat = n_union / n_mc
    if n_union == 0:
        return GapCoefficientEstimate(0.0, math.inf, n_mc, 0.0, 0, True)
    q_hat = n_inter / n_union
    std_err = math.sqrt(max(q_hat * (1.0 - q_hat), 1.0 / n_union) / n_union)
    return GapCoefficientEstimate(q_hat, std_err, n_mc, z_hat, n_union, n_union < 30)


def lens_ratio_closed_form(d: int, s: float) -> float:
    """Overlap ratio of two unit balls at center distance s, closed forms.

    d = 1: interval overlap (2-s)/(2+s).
    d = 2: circular-lens area over union area.
    d = 3: spherical-cap volume over union volume.
    """
    if not (0.0 <= s < 2.0):
        raise ValueError("s must lie in [0, 2)")
    if d == 1:
        return (2.0 - s) / (2.0 + s)
    if d == 2:
        inter = 2.0 * math.acos(s / 2.0) - (s / 2.0) * math.sqrt(4.0 - s * s)
        return inter / (2.0 * math.pi - inter)
    if d == 3:
        inter = (math.pi / 12.0) * (2.0 - s) ** 2 * (4.0 + s)
        return inter / (8.0 * math.pi / 3.0 - inter)
    raise ValueError("closed forms available for d in {1, 2, 3} only")


def kl_null_vs_gap(vol_g: float, vol_v: float, delta: float) -> float:
    """Per-sample KL divergence of uniform vs gap-rarefied densities.

    With g = vol_g / (vol_g + vol_v) the value is
    log(1 - delta g) - g log(1 - delta); it vanishes at delta = 0 and grows
    monotonically on [0, 1).
    """
    if vol_g <= 0.0 or vol_v <= 0.0:
        raise ValueError("region volumes must be positive")
    if not (0.0 <= delta < 1.0):
        raise ValueError("delta must lie in [0, 1)")
    g = vol_g / (vol_g + vol_v)
    return math.log1p(-delta * g) - g * math.log1p(-delta)


def propagation_trial(
    n: int,
    schedule: BandwidthSchedule,
    lam: float,
    seed: int,
    params: GeometryParams | None = None,
) -> bool:
    """Sample a uniform circle and report whether no pair was ever rejected.

    True means every tested pair at every step passed the no-gap test, so
    the final weights equal the plain distance threshold at the last radius.
    """
    data = sample_uniform_manifold(ManifoldSpec("circle"), n, seed)
    params = params or GeometryParams(d=1)
    _, diagnostics = awc_run(data, schedule, lam, params)
    return all(diag.n_rejected == 0 for diag in diagnostics)


def separation_trial(
    n: int,
    eps: float,
    schedule: BandwidthSchedule,
    lam: float,
    seed: int,
    params: GeometryParams | None = None,
) -> bool:
    """Sample the two-cluster circle density and report full separation.

    True iff every eligible cross-cluster pair within the final radius ends
    with weight 0.
    """
    data = sample_circle_gap(n, eps, seed)
    params = params or GeometryParams(d=1)
    weights, _ = awc_run(data, schedule, lam, params)
    iu, ju, same = _eligible_pairs(data, schedule[-1])
    if not np.any(~same):
        return True
    dense = weights.to_dense()
    return not np.any(dense[iu[~same], ju[~same]])
