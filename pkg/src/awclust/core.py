"""Multiscale weight-update loop with the likelihood-ratio test of no gap.

The algorithm maintains a symmetric binary weight matrix over the data.  At
each bandwidth step every pair within range is retested: the empirical mass
of the union of the two local clusters and the fraction of it shared by both
are compared, through a Bernoulli likelihood ratio, against the adjusted
overlap coefficient expected for gap-free data.  Pairs whose statistic
exceeds the threshold lose their weight.

All pair tests inside one step read only the previous step's matrix, so they
are order-independent and the result is deterministic regardless of how the
work is batched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coefficients import GeometryParams, adjusted_coefficient
from .datagen import Dataset

__all__ = [
    "BandwidthSchedule",
    "WeightMatrix",
    "StepDiagnostics",
    "build_schedule",
    "neighbors_within",
    "init_weights",
    "kl_bernoulli",
    "empirical_union_mass",
    "gap_estimate",
    "test_statistic",
    "awc_step",
    "awc_run",
    "awc_run_many",
]


@dataclass(frozen=True)
class BandwidthSchedule:
    """Strictly increasing radii whose consecutive ratios lie in (1, 2)."""

    radii: tuple

    def __post_init__(self) -> None:
        radii = tuple(float(h) for h in self.radii)
        object.__setattr__(self, "radii", radii)
        if len(radii) < 2:
            raise ValueError("schedule needs at least two radii (h0 and one step)")
        if radii[0] <= 0.0:
            raise ValueError("radii must be positive")
        for a, b in zip(radii, radii[1:]):
            if not (1.0 < b / a < 2.0):
                raise ValueError(
                    f"consecutive radii must grow by a factor in (1, 2); got {a} -> {b}"
                )

    @property
    def n_steps(self) -> int:
        return len(self.radii) - 1

    def __iter__(self):
        return iter(self.radii)

    def __len__(self) -> int:
        return len(self.radii)

    def __getitem__(self, k: int) -> float:
        return self.radii[k]


def build_schedule(h0: float, b: float, n_steps: int) -> BandwidthSchedule:
    """Geometric schedule h0 * b^k for k = 0 .. n_steps, with b in (1, 2)."""
    if h0 <= 0.0:
        raise ValueError("h0 must be positive")
    if not (1.0 < b < 2.0):
        raise ValueError(f"growth factor b must lie in (1, 2), got {b}")
    if n_steps < 1:
        raise ValueError("need at least one step")
    return BandwidthSchedule(tuple(h0 * b**k for k in range(n_steps + 1)))


class WeightMatrix:
    """Symmetric binary adjacency with implicit unit diagonal.

    Stored as one sorted integer array of neighbors per point, self excluded.
    """

    __slots__ = ("_neighbors",)

    def __init__(self, neighbors: Sequence[np.ndarray]):
        self._neighbors = [np.asarray(nb, dtype=np.int64) for nb in neighbors]
        n = len(self._neighbors)
        for i, nb in enumerate(self._neighbors):
            if nb.size and (nb[0] < 0 or nb[-1] >= n):
                raise ValueError("neighbor index out of range")
            if np.any(np.diff(nb) <= 0):
                raise ValueError("neighbor lists must be sorted and duplicate-free")
            if np.any(nb == i):
                raise ValueError("neighbor lists must not contain the point itself")

    @classmethod
    def identity(cls, n: int) -> "WeightMatrix":
        return cls([np.empty(0, dtype=np.int64) for _ in range(n)])

    @classmethod
    def from_pairs(cls, n: int, iu: np.ndarray, ju: np.ndarray) -> "WeightMatrix":
        """Build from an undirected edge list (i < j), symmetrizing."""
        heads = np.concatenate([iu, ju])
        tails = np.concatenate([ju, iu])
        order = np.lexsort((tails, heads))
        heads, tails = heads[order], tails[order]
        bounds = np.searchsorted(heads, np.arange(n + 1))
        return cls([tails[bounds[i] : bounds[i + 1]] for i in range(n)])

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "WeightMatrix":
        m = np.asarray(matrix, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("weight matrix must be square")
        if not np.array_equal(m, m.T):
            raise ValueError("weight matrix must be symmetric")
        off = m.copy()
        np.fill_diagonal(off, False)
        return cls([np.flatnonzero(row).astype(np.int64) for row in off])

    def to_dense(self) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n), dtype=bool)
        for i, nb in enumerate(self._neighbors):
            out[i, nb] = True
        np.fill_diagonal(out, True)
        return out

    @property
    def n(self) -> int:
        return len(self._neighbors)

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted indices connected to i, excluding i itself."""
        return self._neighbors[i]

    def degree(self, i: int) -> int:
        return int(self._neighbors[i].size)

    def contains(self, i: int, j: int) -> bool:
        if i == j:
            return True
        nb = self._neighbors[i]
        pos = np.searchsorted(nb, j)
        return pos < nb.size and nb[pos] == j

    def edge_list(self) -> tuple[np.ndarray, np.ndarray]:
        """Undirected edges as (i, j) arrays with i < j, lexicographically sorted."""
        heads, tails = [], []
        for i, nb in enumerate(self._neighbors):
            upper = nb[nb > i]
            heads.append(np.full(upper.size, i, dtype=np.int64))
            tails.append(upper)
        if not heads:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        return np.concatenate(heads), np.concatenate(tails)

    @property
    def n_edges(self) -> int:
        return sum(nb.size for nb in self._neighbors) // 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightMatrix):
            return NotImplemented
        return self.n == other.n and all(
            np.array_equal(a, b) for a, b in zip(self._neighbors, other._neighbors)
        )

    def __repr__(self) -> str:
        return f"WeightMatrix(n={self.n}, edges={self.n_edges})"


def _pair_distances(points: np.ndarray, iu: np.ndarray, ju: np.ndarray) -> np.ndarray:
    diff = points[iu] - points[ju]
    return np.sqrt((diff * diff).sum(axis=-1))


def _range_pairs(points: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All pairs (i < j) with exact distance <= h, sorted by (i, j).

    Candidates come from a Gram-matrix prefilter (small n), a uniform grid
    with cell size h (large n, low ambient dimension), or brute force;
    membership is always decided on the exactly computed pairwise distance,
    so the candidate generator never affects the result.
    """
    n, dim = points.shape
    if n <= 2048:
        if n > 1:
            gram = points @ points.T
            sq = np.einsum("ij,ij->i", points, points)
            d2 = sq[:, None] + sq[None, :] - 2.0 * gram
            # slack absorbs the cancellation error of the Gram form; the
            # exact refilter below removes any extra candidates
            cutoff = h * h * (1.0 + 1e-12) + 64.0 * np.finfo(np.float64).eps * max(1.0, float(sq.max()))
            iu, ju = np.where(np.triu(d2 <= cutoff, 1))
        else:
            iu = ju = np.empty(0, dtype=np.int64)
    elif dim <= 3:
        cells: dict[tuple, list[int]] = {}
        keys = np.floor(points / h).astype(np.int64)
        for i in range(n):
            cells.setdefault(tuple(keys[i]), []).append(i)
        offsets = np.stack(np.meshgrid(*([[-1, 0, 1]] * dim), indexing="ij"), -1).reshape(-1, dim)
        heads, tails = [], []
        for key, members in cells.items():
            base = np.array(key, dtype=np.int64)
            cand: list[int] = []
            for off in offsets:
                cand.extend(cells.get(tuple(base + off), ()))
            cand_arr = np.array(cand, dtype=np.int64)
            for i in members:
                js = cand_arr[cand_arr > i]
                if js.size:
                    heads.append(np.full(js.size, i, dtype=np.int64))
                    tails.append(js)
        if heads:
            iu = np.concatenate(heads)
            ju = np.concatenate(tails)
        else:
            iu = ju = np.empty(0, dtype=np.int64)
    else:
        iu, ju = np.triu_indices(n, k=1)
    dist = _pair_distances(points, iu, ju)
    keep = dist <= h
    iu, ju, dist = iu[keep], ju[keep], dist[keep]
    order = np.lexsort((ju, iu))
    return iu[order], ju[order], dist[order]


def neighbors_within(data: Dataset, h: float) -> list[np.ndarray]:
    """Exact closed-ball neighborhoods: j is listed for i iff dist <= h, i != j."""
    if h <= 0.0:
        raise ValueError("radius must be positive")
    iu, ju, _ = _range_pairs(data.points, h)
    return WeightMatrix.from_pairs(data.n, iu, ju)._neighbors


def init_weights(data: Dataset, h0: float) -> WeightMatrix:
    """Distance-threshold initialization: w_ij = 1 iff dist <= h0 or i = j."""
    if h0 <= 0.0:
        raise ValueError("h0 must be positive")
    iu, ju, _ = _range_pairs(data.points, h0)
    return WeightMatrix.from_pairs(data.n, iu, ju)


def _kl_kernel(alpha, beta):
    """Bernoulli KL divergence with the boundary limits, no input checks.

    K(0, b) = -log(1 - b) and K(1, b) = -log b; K(a, 1) = +inf for a < 1.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        mid = alpha * np.log(alpha / beta) + (1.0 - alpha) * np.log(
            (1.0 - alpha) / (1.0 - beta)
        )
        out = np.where(alpha == 0.0, -np.log1p(-beta), np.where(alpha == 1.0, -np.log(beta), mid))
    return out


def kl_bernoulli(alpha, beta):
    """Kullback-Leibler divergence of Bernoulli(alpha) from Bernoulli(beta).

    alpha may take the boundary values 0 and 1 (handled by the limit
    formulas); beta must lie strictly inside (0, 1).
    """
    alpha_arr = np.asarray(alpha, dtype=np.float64)
    beta_arr = np.asarray(beta, dtype=np.float64)
    if np.any((alpha_arr < 0.0) | (alpha_arr > 1.0)):
        raise ValueError("alpha must lie in [0, 1]")
    if np.any((beta_arr <= 0.0) | (beta_arr >= 1.0)):
        raise ValueError("beta must lie strictly inside (0, 1)")
    out = _kl_kernel(alpha_arr, beta_arr)
    if np.isscalar(alpha) and np.isscalar(beta):
        return float(out)
    return out


def empirical_union_mass(i: int, j: int, weights: WeightMatrix) -> int:
    """Number of points m outside {i, j} connected to i or to j."""
    if i == j:
        raise ValueError("requires a pair of distinct indices")
    union = np.union1d(weights.neighbors(i), weights.neighbors(j))
    return int(union.size - np.isin([i, j], union).sum())

def gap_estimate(i: int, j: int, weights: WeightMatrix) -> float:
    """Shared fraction of the union mass: |C_i ∩ C_j| / |C_i ∪ C_j| off {i, j}.

    An empty union carries no evidence of a gap and returns 1.0.
    """
    if i == j:
        raise ValueError("requires a pair of distinct indices")
    n_union = empirical_union_mass(i, j, weights)
    if n_union == 0:
        return 1.0
    inter = np.intersect1d(weights.neighbors(i), weights.neighbors(j))
    return float(inter.size) / float(n_union)


def _test_statistic_kernel(n_union, theta, q):
    """N K(theta, q) signed positive iff theta < q; zero when N = 0."""
    n_union = np.asarray(n_union, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    sign = np.where(theta < q, 1.0, -1.0)
    with np.errstate(invalid="ignore"):
        t = n_union * _kl_kernel(theta, q) * sign
    return np.where(n_union == 0.0, 0.0, t)


def test_statistic(n_union: int, theta_hat: float, q: float):
    """Signed likelihood-ratio statistic N K(theta_hat, q).

    Positive values are evidence of a gap (theta_hat < q); the sign flips for
    theta_hat >= q.  Requires 0 < q < 1.
    """
    n_arr = np.asarray(n_union)
    theta_arr = np.asarray(theta_hat, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any(n_arr < 0):
        raise ValueError("union mass must be nonnegative")
    if np.any((theta_arr < 0.0) | (theta_arr > 1.0)):
        raise ValueError("theta_hat must lie in [0, 1]")
    if np.any((q_arr <= 0.0) | (q_arr >= 1.0)):
        raise ValueError("q must lie strictly inside (0, 1)")
    out = _test_statistic_kernel(n_arr, theta_arr, q_arr)
    if np.isscalar(n_union) and np.isscalar(theta_hat) and np.isscalar(q):
        return float(out)
    return out


@dataclass
class StepDiagnostics:
    """Per-pair test record for one bandwidth step.

    Arrays are aligned and sorted by (i, j).  ``accepted`` is the weight
    decision for the pair, which under the default retest rule equals
    T <= lambda.
    """

    step: int
    h_prev: float
    h_k: float
    i: np.ndarray
    j: np.ndarray
    dist: np.ndarray
    N: np.ndarray
    theta_hat: np.ndarray
    q: np.ndarray
    T: np.ndarray
    accepted: np.ndarray

    @property
    def n_pairs(self) -> int:
        return self.i.size

    @property
    def n_rejected(self) -> int:
        return int((~self.accepted).sum())


def _step_counts(prev_dense: np.ndarray, iu: np.ndarray, ju: np.ndarray):
    """Union and intersection masses off {i, j} for the given pairs.

    Uses an exact float32 boolean matrix product; counts stay below 2^24 so
    every intermediate is an exactly represented integer, making the result
    independent of BLAS blocking and thread count.
    """
    n = prev_dense.shape[0]
    if n >= 2**24:
        raise ValueError("too many points for exact float32 counting")
    wf = prev_dense.astype(np.float32)
    shared_total = (wf @ wf.T)[iu, ju].astype(np.float64)
    deg = wf.sum(axis=1).astype(np.float64)  # includes the diagonal
    w_pair = prev_dense[iu, ju].astype(np.float64)
    # m = i and m = j each contribute w_ij to the shared count and are
    # always in the union through the unit diagonal.
    inter = shared_total - 2.0 * w_pair
    union = deg[iu] + deg[ju] - shared_total - 2.0
    return union, inter, w_pair


def _step_from_pairs(
    prev_dense: np.ndarray,
    iu: np.ndarray,
    ju: np.ndarray,
    dist: np.ndarray,
    step: int,
    h_prev: float,
    h_k: float,
    lam: float,
    params: GeometryParams,
    q_radius: str,
    carry_forward: bool,
) -> tuple[np.ndarray, StepDiagnostics]:
    union, inter, w_pair = _step_counts(prev_dense, iu, ju)
    r = h_prev if q_radius == "previous" else h_k
    s = dist / r
    q = adjusted_coefficient(params, r, np.atleast_1d(s)) if s.size else np.empty(0)
    q = np.asarray(q, dtype=np.float64).reshape(s.shape)
    has_mass = union > 0.0
    theta = np.where(has_mass, inter / np.maximum(union, 1.0), q)
    t_stat = _test_statistic_kernel(union, theta, q)
    accepted = t_stat <= lam
    if carry_forward:
        accepted = accepted | (w_pair > 0.0)
    n = prev_dense.shape[0]
    new_dense = np.zeros((n, n), dtype=bool)
    new_dense[iu, ju] = accepted
    new_dense[ju, iu] = accepted
    np.fill_diagonal(new_dense, True)
    diag = StepDiagnostics(
        step=step,
        h_prev=h_prev,
        h_k=h_k,
        i=iu.copy(),
        j=ju.copy(),
        dist=dist.copy(),
        N=union.astype(np.int64),
        theta_hat=theta,
        q=q,
        T=t_stat,
        accepted=accepted,
    )
    return new_dense, diag


def _check_step_args(h_prev: float, h_k: float, q_radius: str) -> None:
    if h_prev <= 0.0 or not (h_prev < h_k < 2.0 * h_prev):
        raise ValueError(f"need h_prev < h_k < 2 h_prev, got {h_prev}, {h_k}")
    if q_radius not in ("previous", "current"):
        raise ValueError("q_radius must be 'previous' or 'current'")


def awc_step(
    data: Dataset,
    prev: WeightMatrix,
    h_prev: float,
    h_k: float,
    lam: float,
    params: GeometryParams,
    *,
    step: int = 0,
    q_radius: str = "previous",
    carry_forward: bool = False,
) -> tuple[WeightMatrix, StepDiagnostics]:
    """One weight-update step against the previous step's matrix.

    Every pair within h_k is tested; its overlap coefficient is evaluated at
    the normalized distance dist / h_prev (``q_radius="current"`` divides by
    h_k instead).  With ``carry_forward`` a pair keeps a previous positive
    weight even when the fresh test rejects; the default retests from
    scratch, exactly as the update rule is written.
    """
    _check_step_args(h_prev, h_k, q_radius)
    if prev.n != data.n:
        raise ValueError("weight matrix size does not match the dataset")
    iu, ju, dist = _range_pairs(data.points, h_k)
    new_dense, diag = _step_from_pairs(
        prev.to_dense(), iu, ju, dist, step, h_prev, h_k, lam, params, q_radius, carry_forward
    )
    return WeightMatrix.from_pairs(data.n, iu[diag.accepted], ju[diag.accepted]), diag


def awc_run_many(
    data: Dataset,
    schedule: BandwidthSchedule,
    lambdas: Sequence[float],
    params: GeometryParams,
    *,
    q_radius: str = "previous",
    carry_forward: bool = False,
) -> list[np.ndarray]:
    """Final dense weight matrices for several thresholds on one dataset.

    The pair search and the per-step overlap coefficients do not depend on
    the threshold, so they are computed once and shared; each result is
    identical to the corresponding single-threshold run.  Returns one dense
    boolean matrix per threshold (no diagnostics).
    """
    if not isinstance(schedule, BandwidthSchedule):
        schedule = BandwidthSchedule(tuple(schedule))
    if q_radius not in ("previous", "current"):
        raise ValueError("q_radius must be 'previous' or 'current'")
    n = data.n
    iu, ju, dist = _range_pairs(data.points, schedule[-1])
    sels = [dist <= schedule[k] for k in range(len(schedule))]
    step_q = []
    for k in range(1, len(schedule)):
        r = schedule[k - 1] if q_radius == "previous" else schedule[k]
        s = dist[sels[k]] / r
        q = adjusted_coefficient(params, r, np.atleast_1d(s)) if s.size else np.empty(0)
        step_q.append(np.asarray(q, dtype=np.float64).reshape(s.shape))
    out = []
    for lam in lambdas:
        dense = np.zeros((n, n), dtype=bool)
        dense[iu[sels[0]], ju[sels[0]]] = True
        dense[ju[sels[0]], iu[sels[0]]] = True
        np.fill_diagonal(dense, True)
        for k in range(1, len(schedule)):
            step_iu, step_ju = iu[sels[k]], ju[sels[k]]
            union, inter, w_pair = _step_counts(dense, step_iu, step_ju)
            q = step_q[k - 1]
            has_mass = union > 0.0
            theta = np.where(has_mass, inter / np.maximum(union, 1.0), q)
            t_stat = _test_statistic_kernel(union, theta, q)
            accepted = t_stat <= lam
            if carry_forward:
                accepted = accepted | (w_pair > 0.0)
            dense = np.zeros((n, n), dtype=bool)
            dense[step_iu, step_ju] = accepted
            dense[step_ju, step_iu] = accepted
            np.fill_diagonal(dense, True)
        out.append(dense)
    return out


def awc_run(
    data: Dataset,
    schedule: BandwidthSchedule,
    lam: float,
    params: GeometryParams,
    *,
    q_radius: str = "previous",
    carry_forward: bool = False,
) -> tuple[WeightMatrix, list[StepDiagnostics]]:
    """Full multiscale run: distance initialization at h0, then one test
    step per remaining radius.  Deterministic for fixed inputs.
    """
    if not isinstance(schedule, BandwidthSchedule):
        schedule = BandwidthSchedule(tuple(schedule))
    pts = data.points
    iu, ju, dist = _range_pairs(pts, schedule[-1])
    within_h0 = dist <= schedule[0]
    dense = np.zeros((data.n, data.n), dtype=bool)
    dense[iu[within_h0], ju[within_h0]] = True
    dense[ju[within_h0], iu[within_h0]] = True
    np.fill_diagonal(dense, True)
    diagnostics: list[StepDiagnostics] = []
    for k in range(1, len(schedule)):
        sel = dist <= schedule[k]
        dense, diag = _step_from_pairs(
            dense,
            iu[sel],
            ju[sel],
            dist[sel],
            k,
            schedule[k - 1],
            schedule[k],
            lam,
            params,
            q_radius,
            carry_forward,
        )
        diagnostics.append(diag)
    final = WeightMatrix.from_dense(dense)
    return final, diagnostics
