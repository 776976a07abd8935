"""Shared naive reference implementation for exact-equality checks.

Dense, one pair at a time, Python sets for the masses; no spatial index, no
matrix products, no batching.  Used by the unit suite and the acceptance
suite to pin the production engine bit for bit.
"""

import numpy as np

from awclust import Dataset, GeometryParams
from awclust.coefficients import adjusted_coefficient
from awclust.core import _kl_kernel
from awclust.datagen import CounterRng


def reference_run(data, radii, lam, params, q_radius="previous"):
    """Dense O(n^3)-per-step transcription of the update loop."""
    pts = data.points
    n = pts.shape[0]

    def distance(i, j):
        diff = pts[i] - pts[j]
        return float(np.sqrt((diff * diff).sum(axis=-1)))

    dense = np.zeros((n, n), dtype=bool)
    for i in range(n):
        dense[i, i] = True
        for j in range(i + 1, n):
            dense[i, j] = dense[j, i] = distance(i, j) <= radii[0]

    all_steps = []
    for k in range(1, len(radii)):
        rows = []
        for i in range(n):
            for j in range(i + 1, n):
                dist = distance(i, j)
                if dist > radii[k]:
                    continue
                union = {m for m in range(n) if m != i and m != j and (dense[i, m] or dense[j, m])}
                inter = {m for m in range(n) if m != i and m != j and (dense[i, m] and dense[j, m])}
                n_union = float(len(union))
                r = radii[k - 1] if q_radius == "previous" else radii[k]
                s = dist / r
                q = float(adjusted_coefficient(params, r, s))
                theta = float(len(inter)) / n_union if n_union > 0.0 else q
                sign = 1.0 if theta < q else -1.0
                t_stat = n_union * float(_kl_kernel(theta, q)) * sign if n_union > 0.0 else 0.0
                accepted = t_stat <= lam
                rows.append((k, i, j, dist, int(n_union), theta, q, t_stat, accepted))
        new_dense = np.zeros((n, n), dtype=bool)
        for (_, i, j, _, _, _, _, _, accepted) in rows:
            new_dense[i, j] = new_dense[j, i] = accepted
        np.fill_diagonal(new_dense, True)
        dense = new_dense
        all_steps.append(rows)
    return dense, all_steps


def random_case(case_seed):
    """A small random dataset plus run parameters."""
    rng = CounterRng(900_000 + case_seed)
    u = rng.units(64)
    n = 5 + int(u[0] * 46)  # 5 .. 50
    dim = 1 + int(u[1] * 3)  # 1 .. 3
    pts = rng.units(n * dim).reshape(n, dim)
    if u[2] < 0.5:  # half the cases: two shifted blobs
        pts[n // 2 :, 0] += 0.8
    h0 = 0.08 + 0.3 * u[3]
    b = 1.15 + 0.7 * u[4]
    steps = 2 + int(u[5] * 3)
    lam = -1.0 + 8.0 * u[6]
    d = 1 + int(u[7] * 3)
    kappa = 0.0 if u[8] < 0.5 else float(u[9])
    r_xi = 0.0 if u[10] < 0.5 else float(0.01 * u[11])
    params = GeometryParams(d=d, kappa=kappa, r_xi=r_xi, b_prime=1.5)
    radii = tuple(h0 * b**k for k in range(steps + 1))
    q_radius = "previous" if u[12] < 0.5 else "current"
    return Dataset(points=pts), radii, lam, params, q_radius
