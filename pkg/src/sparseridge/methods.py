"""Named end-to-end fitting pipelines shared by the CLI, tuning and bench.

Every method maps a :class:`~sparseridge.core.ProblemSpec` to a feasible
:class:`~sparseridge.core.SparseEstimator`:

* ``greedy``      -- forward selection;
* ``restricted``  -- perspective relaxation, then greedy inside its support;
* ``randomized``  -- perspective relaxation, independent rounding with
  repair, best of ``trials`` draws;
* ``heuristic``   -- objective-level bisection with the L1 inner engine;
* ``brute``       -- exhaustive enumeration;
* ``bnb``         -- branch and bound to a proven gap.
"""

from __future__ import annotations

from .core import ProblemSpec, SparseEstimator
from .errors import InvalidArgumentError
from .exact import branch_and_bound, brute_force
from .greedy import greedy_select, restricted_greedy
from .heuristic import heuristic_bisection
from .randomized import randomized_solve
from .relaxation import solve_v2_perspective, solve_v4

RELAXATIONS = {"v2": solve_v2_perspective, "v4": solve_v4}


def _fit_greedy(spec: ProblemSpec, **_) -> SparseEstimator:
    return greedy_select(spec)[0]


def _relax_z(spec: ProblemSpec, which: str):
    try:
        solver = RELAXATIONS[which]
    except KeyError:
        raise InvalidArgumentError(f"unknown relaxation {which!r}") from None
    return solver(spec).z


def _fit_restricted(spec: ProblemSpec, delta: float = 0.01, relax: str = "v2", **_):
    return restricted_greedy(spec, _relax_z(spec, relax), delta=delta)[0]


def _fit_randomized(
    spec: ProblemSpec,
    trials: int = 100,
    seed: int = 0,
    relax: str = "v2",
    **_,
) -> SparseEstimator:
    result = randomized_solve(
        spec, _relax_z(spec, relax), trials=trials, seed=seed, repair=True
    )
    assert result.best_repaired is not None
    return result.best_repaired


def _fit_heuristic(spec: ProblemSpec, delta: float = 1e-6, **_) -> SparseEstimator:
    return heuristic_bisection(spec, delta_hat=delta)[0]


def _fit_brute(spec: ProblemSpec, **_) -> SparseEstimator:
    return brute_force(spec)


def _fit_bnb(spec: ProblemSpec, gap_tol: float = 1e-6, **_) -> SparseEstimator:
    return branch_and_bound(spec, gap_tol=gap_tol).estimator


METHODS = {
    "greedy": _fit_greedy,
    "restricted": _fit_restricted,
    "randomized": _fit_randomized,
    "heuristic": _fit_heuristic,
    "brute": _fit_brute,
    "bnb": _fit_bnb,
}


def fit(spec: ProblemSpec, method: str, **options) -> SparseEstimator:
    """Fit with a named method; unknown names raise InvalidArgumentError."""
    try:
        runner = METHODS[method]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown method {method!r}; choose from {sorted(METHODS)}"
        ) from None
    return runner(spec, **options)
