"""Scikit-learn style front end for the weight-update clustering loop."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from .coefficients import GeometryParams, suggest_lambda
from .core import BandwidthSchedule, awc_run, build_schedule
from .datagen import Dataset

__all__ = ["AdaptiveWeightsClustering"]


def _connected_components(n: int, iu: np.ndarray, ju: np.ndarray) -> np.ndarray:
    parent = np.arange(n)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for a, b in zip(iu.tolist(), ju.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    roots = np.array([find(x) for x in range(n)])
    _, labels = np.unique(roots, return_inverse=True)
    return labels


class AdaptiveWeightsClustering(ClusterMixin, BaseEstimator):
    """Clustering by adaptive binary weights over a growing bandwidth scale.

    Maintains an n x n symmetric 0/1 weight matrix; at each radius of a
    geometric schedule, every pair in range is kept or cut by a likelihood
    ratio test of "no gap" between the two points' neighborhoods.  The
    fitted ``weights_`` matrix is the primary output; ``labels_`` are its
    connected components, for convenience and ecosystem compatibility.

    Parameters
    ----------
    h0 : float or None
        Smallest radius.  None picks twice the median nearest-neighbor
        distance of the training data.
    b : float
        Radius growth factor, in (1, 2).
    n_steps : int
        Number of update steps after initialization.
    radii : sequence of float or None
        Explicit schedule; overrides h0/b/n_steps when given.
    lam : float or "auto"
        Test threshold; "auto" uses (alpha/4) ln n.
    alpha : float
        Rate constant for the automatic threshold.
    d : int
        Intrinsic dimension used by the overlap coefficient.
    kappa, r_xi, b_prime : float
        Curvature bound, noise bound, and schedule-ratio cap for the
        coefficient adjustment; the defaults apply no correction.
    q_radius : {"previous", "current"}
        Whether the coefficient normalizes distances by the previous or the
        current radius.
    carry_forward : bool
        Keep previously accepted weights instead of retesting them.

    Attributes
    ----------
    weights_ : WeightMatrix
        Final symmetric binary adjacency.
    labels_ : ndarray of shape (n_samples,)
        Connected components of ``weights_``.
    diagnostics_ : list of StepDiagnostics
        Per-pair test records for every step.
    schedule_ : BandwidthSchedule
        The radii actually used.
    lambda_ : float
        The threshold actually used.
    """

    def __init__(
        self,
        h0: float | None = None,
        b: float = math.sqrt(2.0),
        n_steps: int = 4,
        radii=None,
        lam="auto",
        alpha: float = 4.0,
        d: int = 1,
        kappa: float = 0.0,
        r_xi: float = 0.0,
        b_prime: float = 1.5,
        q_radius: str = "previous",
        carry_forward: bool = False,
    ):
        self.h0 = h0
        self.b = b
        self.n_steps = n_steps
        self.radii = radii
        self.lam = lam
        self.alpha = alpha
        self.d = d
        self.kappa = kappa
        self.r_xi = r_xi
        self.b_prime = b_prime
        self.q_radius = q_radius
        self.carry_forward = carry_forward

    def _resolve_schedule(self, X: np.ndarray) -> BandwidthSchedule:
        if self.radii is not None:
            return BandwidthSchedule(tuple(self.radii))
        h0 = self.h0
        if h0 is None:
            from sklearn.metrics import pairwise_distances

            dmat = pairwise_distances(X)
            np.fill_diagonal(dmat, np.inf)
            nearest = dmat.min(axis=1)
            h0 = 2.0 * float(np.median(nearest))
            if h0 <= 0.0:
                raise ValueError("could not infer h0: data has duplicate-only neighborhoods")
        return build_schedule(h0, self.b, self.n_steps)

    def fit(self, X, y=None):
        """Run the full multiscale loop on X and store weights and labels."""
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        schedule = self._resolve_schedule(X)
        lam = self.lam
        if isinstance(lam, str):
            if lam != "auto":
                raise ValueError(f"lam must be a number or 'auto', got {lam!r}")
            lam = suggest_lambda(X.shape[0], self.alpha)
        params = GeometryParams(d=self.d, kappa=self.kappa, r_xi=self.r_xi, b_prime=self.b_prime)
        weights, diagnostics = awc_run(
            Dataset(points=X),
            schedule,
            float(lam),
            params,
            q_radius=self.q_radius,
            carry_forward=self.carry_forward,
        )
        self.weights_ = weights
        self.diagnostics_ = diagnostics
        self.schedule_ = schedule
        self.lambda_ = float(lam)
        iu, ju = weights.edge_list()
        self.labels_ = _connected_components(X.shape[0], iu, ju)
        self.n_features_in_ = X.shape[1]
        return self

    def fit_predict(self, X, y=None):
        """Fit and return the connected-component labels."""
        return self.fit(X).labels_
