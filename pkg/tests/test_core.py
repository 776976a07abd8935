"""Core loop tests: schedules, neighborhoods, the test statistic, invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awclust import (
    BandwidthSchedule,
    Dataset,
    GeometryParams,
    WeightMatrix,
    adjusted_coefficient,
    awc_run,
    awc_step,
    build_schedule,
    empirical_union_mass,
    gap_estimate,
    init_weights,
    kl_bernoulli,
    neighbors_within,
)
from awclust import test_statistic as signed_statistic
from awclust.datagen import CounterRng

CIRCLE_RADII = tuple(2.0 ** (i / 2.0 - 2.0) for i in range(5))
FLAT = GeometryParams(d=1)


def random_points(n, dim, seed):
    rng = CounterRng(seed)
    return rng.units(n * dim).reshape(n, dim)


class TestSchedule:
    def test_paper_style_radii(self):
        sched = build_schedule(0.25, math.sqrt(2.0), 4)
        expected = [2.0 ** (i / 2.0 - 2.0) for i in range(5)]
        assert len(sched) == 5
        for got, want in zip(sched, expected):
            assert got == pytest.approx(want, rel=1e-12)

    def test_two_radii(self):
        sched = build_schedule(1.0, 1.5, 1)
        assert tuple(sched) == (1.0, 1.5)
        assert sched.n_steps == 1

    def test_rejects_zero_steps(self):
        with pytest.raises(ValueError):
            build_schedule(1.0, 1.5, 0)

    def test_rejects_bad_ratio(self):
        with pytest.raises(ValueError):
            build_schedule(1.0, 2.0, 3)
        with pytest.raises(ValueError):
            build_schedule(1.0, 1.0, 3)
        with pytest.raises(ValueError):
            BandwidthSchedule((1.0, 2.5))
        with pytest.raises(ValueError):
            BandwidthSchedule((1.0,))


class TestNeighborsWithin:
    def test_boundary_inclusion(self):
        data = Dataset(points=np.array([[0.0, 0.0], [1.0, 0.0]]))
        nb = neighbors_within(data, 1.0)
        assert nb[0].tolist() == [1]
        assert nb[1].tolist() == [0]

    def test_boundary_exclusion(self):
        data = Dataset(points=np.array([[0.0, 0.0], [1.0 + 1e-9, 0.0]]))
        nb = neighbors_within(data, 1.0)
        assert nb[0].size == 0 and nb[1].size == 0

    def test_brute_force_agreement(self):
        pts = random_points(300, 2, seed=42)  # grid path kicks in above 256 points
        data = Dataset(points=pts)
        h = 0.08
        nb = neighbors_within(data, h)
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(-1))
        for i in range(300):
            expect = np.flatnonzero((dist[i] <= h) & (np.arange(300) != i))
            assert nb[i].tolist() == expect.tolist()

    def test_high_dim_falls_back(self):
        pts = random_points(40, 6, seed=1)
        data = Dataset(points=pts)
        nb = neighbors_within(data, 0.9)
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(-1))
        for i in range(40):
            expect = np.flatnonzero((dist[i] <= 0.9) & (np.arange(40) != i))
            assert nb[i].tolist() == expect.tolist()


class TestInitWeights:
    def test_close_pair(self):
        data = Dataset(points=np.array([[0.0], [0.5]]))
        w = init_weights(data, 1.0)
        assert np.array_equal(w.to_dense(), np.ones((2, 2), dtype=bool))

    def test_all_isolated(self):
        data = Dataset(points=np.array([[0.0], [5.0], [10.0]]))
        w = init_weights(data, 1.0)
        assert np.array_equal(w.to_dense(), np.eye(3, dtype=bool))

    def test_matches_neighbors_plus_diagonal(self):
        data = Dataset(points=random_points(120, 2, seed=9))
        w = init_weights(data, 0.2)
        nb = neighbors_within(data, 0.2)
        for i in range(120):
            assert w.neighbors(i).tolist() == nb[i].tolist()
            assert w.contains(i, i)


class TestWeightMatrix:
    def test_dense_round_trip(self):
        rng = np.random.default_rng(5)
        m = rng.random((30, 30)) < 0.2
        m = m | m.T
        np.fill_diagonal(m, True)
        w = WeightMatrix.from_dense(m)
        assert np.array_equal(w.to_dense(), m)
        assert WeightMatrix.from_dense(w.to_dense()) == w

    def test_rejects_asymmetric(self):
        m = np.zeros((3, 3), dtype=bool)
        m[0, 1] = True
        with pytest.raises(ValueError):
            WeightMatrix.from_dense(m)

    def test_edge_list_sorted(self):
        m = np.zeros((4, 4), dtype=bool)
        for a, b in [(0, 2), (1, 3), (0, 1)]:
            m[a, b] = m[b, a] = True
        np.fill_diagonal(m, True)
        iu, ju = WeightMatrix.from_dense(m).edge_list()
        assert list(zip(iu.tolist(), ju.tolist())) == [(0, 1), (0, 2), (1, 3)]


class TestKlBernoulli:
    def test_zero_at_equal(self):
        assert kl_bernoulli(0.3, 0.3) == 0.0

    def test_pinned_value(self):
        # 0.5 ln 2 + 0.5 ln(2/3)
        assert kl_bernoulli(0.5, 0.25) == pytest.approx(0.14384103622589042, rel=1e-12)

    def test_boundary_limits(self):
        assert kl_bernoulli(0.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-14)
        assert kl_bernoulli(1.0, 0.25) == pytest.approx(math.log(4.0), rel=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            kl_bernoulli(0.5, 0.0)
        with pytest.raises(ValueError):
            kl_bernoulli(0.5, 1.0)
        with pytest.raises(ValueError):
            kl_bernoulli(-0.1, 0.5)

    @given(st.floats(0.0, 1.0), st.floats(0.01, 0.99))
    @settings(max_examples=300, deadline=None)
    def test_nonnegative_zero_iff_equal(self, alpha, beta):
        val = kl_bernoulli(alpha, beta)
        assert val >= 0.0
        if alpha == beta:
            assert val == 0.0

    def test_pinsker_grid(self):
        alphas = np.linspace(0.0, 1.0, 100)
        betas = np.linspace(0.01, 0.99, 99)
        for b in betas:
            kl = kl_bernoulli(alphas, float(b))
            assert np.all(kl >= 2.0 * (alphas - b) ** 2 - 1e-12)


def _counts_oracle(dense, i, j):
    n = dense.shape[0]
    union = {m for m in range(n) if m not in (i, j) and (dense[i, m] or dense[j, m])}
    inter = {m for m in range(n) if m not in (i, j) and (dense[i, m] and dense[j, m])}
    return len(union), len(inter)


class TestUnionAndGap:
    def test_isolated_pair(self):
        w = WeightMatrix.from_dense(np.eye(4, dtype=bool) | _edges(4, [(0, 1)]))
        assert empirical_union_mass(0, 1, w) == 0
        assert gap_estimate(0, 1, w) == 1.0  # no evidence convention

    def test_clique(self):
        w = WeightMatrix.from_dense(np.ones((5, 5), dtype=bool))
        assert empirical_union_mass(0, 1, w) == 3
        assert gap_estimate(0, 1, w) == 1.0

    def test_disjoint_neighborhoods(self):
        w = WeightMatrix.from_dense(np.eye(6, dtype=bool) | _edges(6, [(0, 2), (0, 3), (1, 4), (1, 5)]))
        assert empirical_union_mass(0, 1, w) == 4
        assert gap_estimate(0, 1, w) == 0.0

    def test_random_against_set_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            n = int(rng.integers(4, 40))
            m = rng.random((n, n)) < rng.uniform(0.05, 0.5)
            m = m | m.T
            np.fill_diagonal(m, True)
            w = WeightMatrix.from_dense(m)
            i, j = rng.choice(n, size=2, replace=False)
            union, inter = _counts_oracle(m, int(i), int(j))
            assert empirical_union_mass(int(i), int(j), w) == union
            if union:
                assert gap_estimate(int(i), int(j), w) == inter / union

    def test_rejects_equal_indices(self):
        w = WeightMatrix.identity(3)
        with pytest.raises(ValueError):
            empirical_union_mass(2, 2, w)


def _edges(n, pairs):
    m = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        m[a, b] = m[b, a] = True
    return m


class TestTestStatistic:
    def test_zero_at_coefficient(self):
        assert signed_statistic(50, 0.3, 0.3) == 0.0

    def test_gap_direction_positive(self):
        # 100 K(0.1, 0.3) with K = 0.1 ln(1/3) + 0.9 ln(9/7)
        expected = 100.0 * (0.1 * math.log(0.1 / 0.3) + 0.9 * math.log(0.9 / 0.7))
        assert expected == pytest.approx(11.632175658600461, rel=1e-12)
        assert signed_statistic(100, 0.1, 0.3) == pytest.approx(expected, rel=1e-12)

    def test_homogeneous_direction_negative(self):
        expected = -100.0 * (0.5 * math.log(0.5 / 0.3) + 0.5 * math.log(0.5 / 0.7))
        assert expected == pytest.approx(-8.717669357238892, rel=1e-12)
        assert signed_statistic(100, 0.5, 0.3) == pytest.approx(expected, rel=1e-12)

    def test_zero_mass_is_zero(self):
        assert signed_statistic(0, 0.9, 0.5) == 0.0

    def test_sign_encodes_direction(self):
        assert signed_statistic(10, 0.2, 0.5) > 0.0
        assert signed_statistic(10, 0.8, 0.5) < 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            signed_statistic(10, 0.5, 1.0)
        with pytest.raises(ValueError):
            signed_statistic(10, 0.5, 0.0)
        with pytest.raises(ValueError):
            signed_statistic(-1, 0.5, 0.5)


class TestAwcStep:
    def test_dense_blob_keeps_weights(self):
        pts = random_points(60, 2, seed=3) * 0.3
        data = Dataset(points=pts)
        prev = init_weights(data, 0.25)
        new, diag = awc_step(data, prev, 0.25, 0.35, lam=50.0, params=FLAT, step=1)
        assert diag.n_rejected == 0
        assert new.n_edges >= prev.n_edges

    def test_two_blobs_bridge_cut(self):
        # two tight blobs; the single cross pair sees an empty intersection
        # and a large union, so any moderate threshold cuts it
        left = random_points(25, 2, seed=1) * 0.2
        right = random_points(25, 2, seed=2) * 0.2 + np.array([1.6, 0.0])
        pts = np.vstack([left, right])
        data = Dataset(points=pts)
        prev = init_weights(data, 1.0)  # no cross link fits inside h0
        new, diag = awc_step(data, prev, 1.0, 1.5, lam=5.0, params=FLAT, step=1)
        cross = (diag.i < 25) & (diag.j >= 25)
        assert cross.any()
        assert diag.theta_hat[cross].max() == 0.0
        assert not diag.accepted[cross].any()
        assert not any(new.contains(i, j) for i in range(25) for j in range(25, 50))
        # hand check one cross pair: T = N * K(0, q) = -N ln(1 - q)
        idx = int(np.flatnonzero(cross)[0])
        n_union = diag.N[idx]
        q = diag.q[idx]
        assert diag.T[idx] == pytest.approx(-n_union * math.log1p(-q), rel=1e-12)

    def test_permutation_equivariance(self):
        pts = random_points(40, 2, seed=8)
        data = Dataset(points=pts)
        prev = init_weights(data, 0.3)
        new, _ = awc_step(data, prev, 0.3, 0.45, lam=2.0, params=FLAT, step=1)
        perm = np.random.default_rng(0).permutation(40)
        data_p = Dataset(points=pts[perm])
        prev_p = WeightMatrix.from_dense(prev.to_dense()[np.ix_(perm, perm)])
        new_p, _ = awc_step(data_p, prev_p, 0.3, 0.45, lam=2.0, params=FLAT, step=1)
        assert np.array_equal(new_p.to_dense(), new.to_dense()[np.ix_(perm, perm)])

    def test_lambda_monotone_single_step(self):
        pts = random_points(50, 2, seed=12)
        data = Dataset(points=pts)
        prev = init_weights(data, 0.25)
        dense_low, _ = awc_step(data, prev, 0.25, 0.4, lam=0.5, params=FLAT, step=1)
        dense_high, _ = awc_step(data, prev, 0.25, 0.4, lam=3.0, params=FLAT, step=1)
        low = dense_low.to_dense()
        high = dense_high.to_dense()
        assert np.all(high[low])  # raising lambda only adds weights

    def test_step_preconditions(self):
        data = Dataset(points=random_points(10, 2, seed=0))
        prev = init_weights(data, 0.3)
        with pytest.raises(ValueError):
            awc_step(data, prev, 0.3, 0.7, lam=1.0, params=FLAT)
        with pytest.raises(ValueError):
            awc_step(data, prev, 0.3, 0.2, lam=1.0, params=FLAT)


class TestAwcRun:
    def test_two_points_stay_connected(self):
        data = Dataset(points=np.array([[0.0, 0.0], [0.1, 0.0]]))
        sched = build_schedule(0.25, 1.4, 3)
        w, diags = awc_run(data, sched, lam=1.0, params=FLAT)
        assert w.contains(0, 1)
        assert len(diags) == 3

    def test_infinite_lambda_gives_distance_threshold(self):
        pts = random_points(80, 2, seed=21)
        data = Dataset(points=pts)
        sched = build_schedule(0.1, 1.5, 3)
        w, _ = awc_run(data, sched, lam=math.inf, params=FLAT)
        expect = init_weights(data, sched[-1])
        assert w == expect

    def test_very_negative_lambda_clears_everything(self):
        pts = random_points(30, 2, seed=22)
        data = Dataset(points=pts)
        sched = build_schedule(0.1, 1.5, 2)
        w, _ = awc_run(data, sched, lam=-1e9, params=FLAT)
        assert w.n_edges == 0

    def test_symmetry_diagonal_support_every_step(self):
        pts = random_points(70, 2, seed=30)
        data = Dataset(points=pts)
        sched = build_schedule(0.15, 1.4, 3)
        w, diags = awc_run(data, sched, lam=2.0, params=FLAT)
        dense = w.to_dense()
        assert np.array_equal(dense, dense.T)
        assert dense.diagonal().all()
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(-1))
        off = dense & ~np.eye(70, dtype=bool)
        assert np.all(dist[off] <= sched[-1])
        for k, diag in enumerate(diags, start=1):
            assert np.all(diag.accepted == (diag.T <= 2.0))
            assert np.all(diag.dist <= sched[k])
            # theta_hat * N recovers the integer intersection count
            counts = diag.theta_hat * diag.N
            assert np.allclose(counts, np.round(counts), atol=1e-9)

    def test_rerun_bitwise_identical(self):
        pts = random_points(60, 2, seed=33)
        data = Dataset(points=pts)
        sched = build_schedule(0.2, 1.4, 3)
        w1, d1 = awc_run(data, sched, lam=1.7, params=FLAT)
        w2, d2 = awc_run(data, sched, lam=1.7, params=FLAT)
        assert w1 == w2
        for a, b in zip(d1, d2):
            assert np.array_equal(a.T, b.T)
            assert np.array_equal(a.q, b.q)

    def test_duplicate_points_stay_together(self):
        # coincident points share every neighborhood, so the no-gap test
        # keeps them connected through all steps
        pts = np.vstack([random_points(20, 2, seed=40), [[0.5, 0.5], [0.5, 0.5]]])
        data = Dataset(points=pts)
        sched = build_schedule(0.2, 1.4, 2)
        w, _ = awc_run(data, sched, lam=1.0, params=FLAT)
        assert w.contains(20, 21)

    def test_carry_forward_keeps_accepted_pairs(self):
        pts = random_points(50, 2, seed=44)
        data = Dataset(points=pts)
        sched = build_schedule(0.15, 1.4, 3)
        w_retest, _ = awc_run(data, sched, lam=0.8, params=FLAT)
        w_carry, _ = awc_run(data, sched, lam=0.8, params=FLAT, carry_forward=True)
        assert np.all(w_carry.to_dense()[w_retest.to_dense()])

    def test_batch_thresholds_match_single_runs(self):
        from awclust.core import awc_run_many

        pts = random_points(80, 2, seed=50)
        data = Dataset(points=pts)
        sched = build_schedule(0.15, 1.4, 3)
        lambdas = (-0.5, 0.8, 3.0, math.inf)
        for carry in (False, True):
            denses = awc_run_many(data, sched, lambdas, FLAT, carry_forward=carry)
            for lam, dense in zip(lambdas, denses):
                w, _ = awc_run(data, sched, lam, FLAT, carry_forward=carry)
                assert np.array_equal(w.to_dense(), dense)

    def test_grid_search_path_matches_brute_force(self):
        # above 2048 points the pair search switches to the uniform grid;
        # the candidate generator must not change the exact pair set
        from awclust.core import _range_pairs

        rng = CounterRng(71)
        pts = rng.units(2300 * 2).reshape(2300, 2)
        iu, ju, dist = _range_pairs(pts, 0.05)
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff * diff).sum(-1))
        biu, bju = np.where(np.triu(d <= 0.05, 1))
        assert np.array_equal(iu, biu)
        assert np.array_equal(ju, bju)
        assert np.array_equal(dist, d[biu, bju])

    def test_q_radius_current_uses_larger_radius(self):
        pts = random_points(50, 2, seed=45)
        data = Dataset(points=pts)
        sched = build_schedule(0.2, 1.4, 1)
        _, d_prev = awc_run(data, sched, lam=1.0, params=FLAT)
        _, d_curr = awc_run(data, sched, lam=1.0, params=FLAT, q_radius="current")
        pair = 0
        s_prev = d_prev[0].dist[pair] / sched[0]
        s_curr = d_curr[0].dist[pair] / sched[1]
        assert d_prev[0].q[pair] == pytest.approx(adjusted_coefficient(FLAT, sched[0], s_prev))
        assert d_curr[0].q[pair] == pytest.approx(adjusted_coefficient(FLAT, sched[1], s_curr))
        assert d_curr[0].q[pair] > d_prev[0].q[pair]
