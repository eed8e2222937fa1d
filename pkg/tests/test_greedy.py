import json
import time

import numpy as np
import pytest

from helpers import identity_pair_spec, random_spec
from sparseridge import (
    Dataset,
    InvalidArgumentError,
    ProblemSpec,
    SpectralStats,
    brute_force,
    greedy_distance_bound,
    greedy_ratio_bound,
    greedy_select,
    marginal_gain,
    mic_value,
    restricted_estimator,
    restricted_greedy,
    spectral_stats,
)
from sparseridge.greedy import GreedyState


class TestMarginalGain:
    def test_identity_pair_first_pick(self):
        spec = identity_pair_spec(lam=0.1, k=1)
        state = GreedyState.initial(spec)
        # A = 0.2*I: gain = -0.1 * 5^2 / (1 + 5)
        assert marginal_gain(state, 0) == pytest.approx(-0.41666666666666663, abs=1e-12)

    def test_zero_column_gains_nothing(self):
        X = np.column_stack([np.ones(4), np.zeros(4)])
        spec = ProblemSpec(data=Dataset(X=X, y=np.ones(4)), lam=0.2, k=1)
        state = GreedyState.initial(spec)
        assert marginal_gain(state, 1) == 0.0

    def test_matches_direct_inverse_difference(self, rng):
        spec = random_spec(rng, 10, 5, 3, 0.2)
        state = GreedyState.initial(spec)
        state.select(2)
        for j in (0, 1, 3, 4):
            direct = mic_value(spec, {2, j}) - mic_value(spec, {2})
            assert marginal_gain(state, j) == pytest.approx(direct, abs=1e-10)

    def test_already_selected_rejected(self, rng):
        spec = random_spec(rng, 8, 4, 2, 0.1)
        state = GreedyState.initial(spec)
        state.select(1)
        with pytest.raises(InvalidArgumentError):
            marginal_gain(state, 1)


class TestGreedySelect:
    def test_identity_pair_tie_break(self):
        spec = identity_pair_spec(lam=0.1, k=1)
        est, trace = greedy_select(spec)
        assert est.support == (0,)  # tie between the two features: lowest wins
        assert est.objective == pytest.approx(0.5833333333333334, abs=1e-10)
        assert trace.steps[0].value == pytest.approx(est.objective, abs=1e-8)

    def test_full_budget_is_plain_ridge(self, rng):
        spec = random_spec(rng, 12, 5, 5, 0.3)
        est, trace = greedy_select(spec)
        assert est.support == tuple(range(5))
        full = restricted_estimator(spec, range(5))
        assert est.objective == pytest.approx(full.objective, rel=1e-12)
        assert len(trace.steps) == 5

    def test_sandwich_against_brute_force(self, rng):
        spec = random_spec(rng, 25, 10, 3, 0.2)
        est, _ = greedy_select(spec)
        star = brute_force(spec)
        stats = spectral_stats(spec)
        bound = greedy_ratio_bound(spec, stats)
        assert star.objective <= est.objective + 1e-10
        assert est.objective <= bound * star.objective + 1e-10

    def test_value_tracks_refit_objective(self, rng):
        for _ in range(5):
            spec = random_spec(rng, 15, 8, 3, float(rng.choice([0.05, 0.2, 1.0])))
            est, trace = greedy_select(spec)
            assert trace.steps[-1].value == pytest.approx(
                est.objective, abs=1e-8 * (1 + est.objective)
            )

    def test_gain_accumulation_consistent(self, rng):
        spec = random_spec(rng, 20, 9, 4, 0.15)
        _, trace = greedy_select(spec)
        value = float(spec.y @ spec.y) / spec.n
        for step in trace.steps:
            value += step.gain
            assert step.value == pytest.approx(value, abs=1e-10)

    def test_zero_gain_fill_marks_trace(self):
        data = Dataset(X=np.eye(3), y=np.zeros(3))
        spec = ProblemSpec(data=data, lam=0.5, k=2)
        est, trace = greedy_select(spec)
        assert est.cardinality == 2  # the loop still fills the budget
        assert all(s.zero_gain for s in trace.steps)
        assert est.support == (0, 1)  # lowest indices on ties

    def test_trace_json_lines(self, rng):
        spec = random_spec(rng, 10, 4, 2, 0.2)
        _, trace = greedy_select(spec)
        lines = trace.to_json_lines().splitlines()
        assert len(lines) == 2
        rec = json.loads(lines[0])
        assert set(rec) == {"iter", "chosen", "gain", "value"}


class TestIncrementalState:
    def test_products_match_fresh_inverse_through_run(self, rng):
        for _ in range(3):
            n, p = 30, 20
            spec = random_spec(rng, n, p, 6, float(rng.choice([0.05, 0.3])))
            state = GreedyState.initial(spec)
            order = rng.permutation(p)[: spec.k]
            for j in order:
                state.select(int(j))
                A = spec.n * spec.lam * np.eye(n)
                for i in state.selected:
                    A += np.outer(spec.X[:, i], spec.X[:, i])
                Ainv = np.linalg.inv(A)
                assert np.max(np.abs(state.inv_products - Ainv @ spec.X)) < 1e-8
                assert state.quad_terms == pytest.approx(
                    np.sum(spec.X * (Ainv @ spec.X), axis=0), abs=1e-8
                )
                assert state.cross_terms == pytest.approx(
                    spec.y @ Ainv @ spec.X, abs=1e-8
                )
                assert state.inv_y == pytest.approx(Ainv @ spec.y, abs=1e-8)

    def test_current_value_is_positive_and_decreasing(self, rng):
        spec = random_spec(rng, 15, 10, 5, 0.1)
        _, trace = greedy_select(spec)
        values = [float(spec.y @ spec.y) / spec.n] + [s.value for s in trace.steps]
        assert all(v > 0 for v in values)
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


class TestRestrictedGreedy:
    def test_integral_relaxation_is_copied(self, rng):
        spec = random_spec(rng, 12, 6, 2, 0.2)
        zhat = np.array([0.0, 1.0, 0.0, 0.0, 1.0, 0.0])
        est, _ = restricted_greedy(spec, zhat)
        assert est.support == (1, 4)

    def test_identity_pair_equals_unrestricted(self):
        spec = identity_pair_spec(lam=0.1, k=1)
        est, _ = restricted_greedy(spec, np.array([0.5, 0.5]), delta=0.01)
        full, _ = greedy_select(spec)
        assert est.support == full.support
        assert est.objective == pytest.approx(full.objective, rel=1e-12)

    def test_matches_filtered_rerun(self, rng):
        spec = random_spec(rng, 50, 40, 5, 0.1)
        zhat = np.clip(rng.uniform(-0.3, 1.0, size=40), 0.0, 1.0)
        est, _ = restricted_greedy(spec, zhat, delta=0.05)
        keep = np.flatnonzero(zhat >= 0.05)
        sub = ProblemSpec(
            data=Dataset(X=spec.X[:, keep], y=spec.y), lam=spec.lam, k=spec.k
        )
        sub_est, _ = greedy_select(sub)
        mapped = tuple(int(keep[i]) for i in sub_est.support)
        assert est.support == tuple(sorted(mapped))
        assert est.objective == pytest.approx(sub_est.objective, rel=1e-10)

    def test_short_candidate_warning(self, rng):
        spec = random_spec(rng, 10, 6, 3, 0.2)
        zhat = np.array([0.9, 0.0, 0.0, 0.0, 0.0, 0.0])
        with pytest.warns(UserWarning, match="candidates"):
            est, trace = restricted_greedy(spec, zhat)
        assert est.support == (0,)
        assert trace.short_candidates

    def test_empty_candidates(self, rng):
        spec = random_spec(rng, 10, 4, 2, 0.2)
        with pytest.warns(UserWarning, match="beta = 0"):
            est, _ = restricted_greedy(spec, np.zeros(4))
        assert est.cardinality == 0

    def test_invalid_delta(self, rng):
        spec = random_spec(rng, 10, 4, 2, 0.2)
        with pytest.raises(InvalidArgumentError):
            restricted_greedy(spec, np.full(4, 0.5), delta=0.0)


class TestRatioBound:
    def test_identity_pair_closed_form(self):
        spec = identity_pair_spec(lam=0.1, k=1)
        stats = spectral_stats(spec)
        assert stats.theta[1] == pytest.approx(1.0)
        assert stats.underline_theta == pytest.approx(1.0)
        assert greedy_ratio_bound(spec, stats) == pytest.approx(5.943685, abs=1e-4)

    def test_vanishing_small_eigenvalue_term(self):
        spec = identity_pair_spec(lam=0.1, k=1)
        stats = SpectralStats(theta={0: 0.0, 1: 1.0}, underline_theta=0.0)
        nl = spec.n * spec.lam
        assert greedy_ratio_bound(spec, stats) == pytest.approx((nl + 1.0) / nl)

    def test_sandwich_random(self, rng):
        spec = random_spec(rng, 20, 8, 2, 0.3)
        stats = spectral_stats(spec)
        bound = greedy_ratio_bound(spec, stats)
        est, _ = greedy_select(spec)
        star = brute_force(spec)
        assert bound >= 1.0
        assert est.objective <= bound * star.objective + 1e-10


class TestDistanceBound:
    def test_holds_on_solvable_instances(self, rng):
        for _ in range(10):
            spec = random_spec(rng, 18, 8, 3, float(rng.choice([0.1, 0.5])))
            est, _ = greedy_select(spec)
            star = brute_force(spec)
            stats = spectral_stats(spec)
            bound = greedy_distance_bound(spec, stats, est, star)
            dist = float(np.linalg.norm(est.beta - star.beta))
            assert dist <= bound + 1e-10

    def test_identical_supports_shrink_first_term(self, rng):
        spec = random_spec(rng, 20, 6, 2, 1.0)
        star = brute_force(spec)
        stats = spectral_stats(spec)
        bound_same = greedy_distance_bound(spec, stats, star, star)
        nl = spec.n * spec.lam
        # with no support difference only the excess term remains
        import math

        Xu = spec.X[:, list(star.support)]
        sig = float(np.linalg.eigvalsh(Xu.T @ Xu)[0])
        nu = greedy_ratio_bound(spec, stats) - 1.0
        expected = math.sqrt(spec.n * nu * star.objective / (nl + sig))
        assert bound_same == pytest.approx(expected, rel=1e-9)


def test_per_iteration_cost_scales_linearly_in_p():
    rng = np.random.default_rng(0)
    n, k = 40, 4
    times = {}
    for p in (250, 500, 1000):
        spec = random_spec(rng, n, p, k, 0.1)
        best = np.inf
        for _ in range(5):
            t0 = time.perf_counter()
            greedy_select(spec)
            best = min(best, (time.perf_counter() - t0) / k)
        times[p] = best
    slope = (times[1000] - times[250]) / 750.0
    predicted_mid = times[250] + slope * 250.0
    assert abs(times[500] - predicted_mid) <= 0.3 * predicted_mid + 1e-5
