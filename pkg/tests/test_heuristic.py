import math

import numpy as np
import pytest

from helpers import identity_pair_spec, random_spec
from oracles import (
    elastic_net_objective,
    min_l1_path_scan,
    proximal_gradient_elastic_net,
)
from sparseridge import (
    InfeasibleLevelError,
    InvalidArgumentError,
    brute_force,
    elastic_net_cd,
    heuristic_bisection,
    min_l1_given_level,
    restricted_estimator,
    ridge_objective,
)


class TestElasticNetCd:
    def test_no_l1_term_is_plain_ridge(self, rng):
        spec = random_spec(rng, 12, 5, 5, 0.3)
        beta = elastic_net_cd(spec, gamma=0.0)
        full = restricted_estimator(spec, range(5))
        assert beta == pytest.approx(full.beta, abs=1e-7)

    def test_full_shrinkage_threshold(self, rng):
        spec = random_spec(rng, 15, 6, 2, 0.2)
        gamma = 2.0 * float(np.abs(spec.X.T @ spec.y).max()) / spec.n
        # at the exact threshold rounding can leave O(eps) coefficients
        assert np.abs(elastic_net_cd(spec, gamma=gamma)).max() <= 1e-12
        assert np.all(elastic_net_cd(spec, gamma=1.1 * gamma) == 0.0)

    def test_matches_proximal_gradient_oracle(self, rng):
        spec = random_spec(rng, 30, 8, 3, 0.1)
        gamma = 0.2
        beta = elastic_net_cd(spec, gamma=gamma)
        oracle = proximal_gradient_elastic_net(spec.X, spec.y, spec.lam, gamma)
        ours = elastic_net_objective(spec.X, spec.y, spec.lam, gamma, beta)
        ref = elastic_net_objective(spec.X, spec.y, spec.lam, gamma, oracle)
        assert ours <= ref + 1e-7

    def test_coordinatewise_stationarity(self, rng):
        spec = random_spec(rng, 20, 7, 3, 0.2)
        gamma = 0.15
        beta = elastic_net_cd(spec, gamma=gamma, tol=1e-10)
        r = spec.y - spec.X @ beta
        for i in range(spec.p):
            c = float(spec.X[:, i] @ r) / spec.n
            if beta[i] != 0.0:
                # smooth gradient balances the L1 subgradient exactly
                viol = abs(-2 * c + 2 * spec.lam * beta[i] + gamma * np.sign(beta[i]))
                assert viol <= 1e-6
            else:
                assert abs(c) <= gamma / 2 + 1e-8

    def test_negative_gamma_rejected(self, rng):
        spec = random_spec(rng, 8, 3, 1, 0.1)
        with pytest.raises(InvalidArgumentError):
            elastic_net_cd(spec, gamma=-0.1)


class TestMinL1GivenLevel:
    def test_naive_level_needs_nothing(self, rng):
        spec = random_spec(rng, 10, 4, 2, 0.2)
        beta = min_l1_given_level(spec, float(spec.y @ spec.y) / spec.n)
        assert np.all(beta == 0.0)

    def test_level_respected_and_l1_minimal(self):
        spec = identity_pair_spec(lam=0.1, k=1)
        level = 0.583334
        beta = min_l1_given_level(spec, level)
        assert ridge_objective(spec, beta) <= level + 1e-8
        assert np.count_nonzero(beta) <= 2
        oracle_l1 = min_l1_path_scan(spec.X, spec.y, spec.lam, level)
        assert float(np.abs(beta).sum()) <= oracle_l1 + 1e-6

    def test_level_at_ridge_minimum_gives_dense_fit(self, rng):
        spec = random_spec(rng, 12, 5, 5, 0.3)
        full = restricted_estimator(spec, range(5))
        beta = min_l1_given_level(spec, full.objective + 1e-12)
        assert beta == pytest.approx(full.beta, abs=1e-4)

    def test_infeasible_level(self, rng):
        from sparseridge import ProblemSpec

        spec = random_spec(rng, 12, 5, 2, 0.3)
        wide = ProblemSpec(data=spec.data, lam=spec.lam, k=5)
        full = restricted_estimator(wide, range(5))
        with pytest.raises(InfeasibleLevelError):
            min_l1_given_level(spec, full.objective * 0.5)


class TestBisection:
    def test_tolerance_above_initial_gap(self, rng):
        spec = random_spec(rng, 10, 4, 2, 0.2)
        yy = float(spec.y @ spec.y) / spec.n
        est, trace = heuristic_bisection(spec, delta_hat=yy + 1.0)
        assert trace.iterations == 0
        assert est.cardinality == 0
        assert trace.final_value == pytest.approx(yy, rel=1e-12)

    def test_identity_pair_contract(self):
        # the symmetric instance never certifies a 1-sparse witness through
        # the L1 route, so the output is the safe zero estimator; the
        # iteration bound and feasibility still hold
        spec = identity_pair_spec(lam=0.1, k=1)
        est, trace = heuristic_bisection(spec, delta_hat=1e-4)
        bound = math.floor(math.log2(float(spec.y @ spec.y) / (spec.n * 1e-4))) + 1
        assert trace.iterations <= bound
        assert est.cardinality <= spec.k
        star = brute_force(spec)
        assert trace.final_value >= star.objective - 1e-9

    def test_random_instances_contract(self, rng):
        for _ in range(6):
            n = int(rng.integers(15, 31))
            spec = random_spec(rng, n, 10, 3, float(rng.choice([0.05, 0.2])))
            delta = 1e-3
            est, trace = heuristic_bisection(spec, delta_hat=delta)
            star = brute_force(spec)
            yy = float(spec.y @ spec.y)
            bound = math.floor(math.log2(yy / (spec.n * delta))) + 1
            assert trace.iterations <= bound
            assert est.cardinality <= spec.k
            assert trace.final_value >= star.objective - 1e-9
            assert est.objective == pytest.approx(
                ridge_objective(spec, est.beta), rel=1e-12
            )

    def test_bracket_halves_every_iteration(self, rng):
        spec = random_spec(rng, 20, 8, 3, 0.1)
        _, trace = heuristic_bisection(spec, delta_hat=1e-3)
        gap = float(spec.y @ spec.y) / spec.n
        for step in trace.steps:
            gap /= 2.0
            assert step.upper - step.lower == pytest.approx(gap, rel=1e-12)

    def test_down_branches_certify_sparsity(self, rng):
        spec = random_spec(rng, 25, 9, 3, 0.1)
        _, trace = heuristic_bisection(spec, delta_hat=1e-3)
        for step in trace.steps:
            if step.branch == "down":
                assert step.zeros >= spec.p - spec.k

    def test_trace_json_lines(self, rng):
        import json

        spec = random_spec(rng, 12, 5, 2, 0.2)
        _, trace = heuristic_bisection(spec, delta_hat=1e-2)
        for line in trace.to_json_lines().splitlines():
            rec = json.loads(line)
            assert set(rec) == {"iter", "L", "U", "q", "l1", "zeros", "branch"}

    def test_rejects_bad_tolerance(self, rng):
        spec = random_spec(rng, 8, 3, 1, 0.1)
        with pytest.raises(InvalidArgumentError):
            heuristic_bisection(spec, delta_hat=0.0)
