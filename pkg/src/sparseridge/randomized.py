"""Independent rounding of a fractional relaxation solution.

Each feature i is kept with probability zhat_i (one uniform draw per
feature), so the expected cardinality is sum(zhat) <= k but individual
draws may exceed the budget; a concentration bound quantifies by how much.
The multi-trial driver keeps the best draw and, optionally, repairs
over-budget draws by refitting on the drawn support and dropping the
smallest-magnitude coefficients.

Randomness comes from the counter-based Philox generator with one stream
per trial, keyed as ``seed XOR trial_index``, so any single trial can be
reproduced in isolation on any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ProblemSpec,
    SparseEstimator,
    _subset_coefficients,
    mic_value,
    restricted_estimator,
)
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class RoundingOutcome:
    """One rounding draw: support, indicator vector, its value and seed."""

    support: tuple[int, ...]
    z_tilde: np.ndarray
    cardinality: int
    value: float
    seed: int

    def __post_init__(self) -> None:
        z = np.array(self.z_tilde, dtype=float)
        z.setflags(write=False)
        object.__setattr__(self, "z_tilde", z)


@dataclass(frozen=True)
class RandomizedResult:
    """Best-of-trials outcome plus aggregate trial statistics."""

    best: RoundingOutcome
    best_repaired: SparseEstimator | None
    best_repaired_raw_value: float | None
    trials: int
    mean_cardinality: float
    p_exceed_bound: float
    alpha: float

    def to_json_dict(self) -> dict:
        out = {
            "trials": self.trials,
            "best_value": self.best.value,
            "best_support": list(self.best.support),
            "mean_cardinality": self.mean_cardinality,
            "p_exceed_bound": self.p_exceed_bound,
            "alpha": self.alpha,
        }
        if self.best_repaired is not None:
            out["repaired_value"] = self.best_repaired.objective
            out["repaired_support"] = list(self.best_repaired.support)
        return out


def _check_zhat(zhat: np.ndarray, p: int | None = None) -> np.ndarray:
    zhat = np.asarray(zhat, dtype=float)
    if zhat.ndim != 1 or (p is not None and zhat.shape != (p,)):
        raise InvalidArgumentError("zhat must be a 1-D vector of length p")
    if np.any(zhat < -1e-9) or np.any(zhat > 1 + 1e-9):
        raise InvalidArgumentError("zhat entries must lie in [0, 1]")
    return np.clip(zhat, 0.0, 1.0)


def _trial_stream(seed: int, trial: int) -> np.random.Generator:
    if seed < 0:
        raise InvalidArgumentError(f"seed must be nonnegative, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed ^ trial))


def randomized_round(zhat: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """One independent-rounding draw; returns (support, z_tilde).

    Feature i is included iff a uniform draw U_i satisfies U_i <= zhat_i.
    Deterministic given the seed.
    """
    zhat = _check_zhat(zhat)
    u = _trial_stream(int(seed), 0).random(zhat.shape[0])
    z_tilde = (u <= zhat).astype(float)
    return np.flatnonzero(z_tilde), z_tilde


def cardinality_bound(k: int, alpha: float) -> float:
    """Level-alpha bound on the rounded cardinality: (1 + sqrt(3*log(2/alpha)/k))*k."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    return (1.0 + math.sqrt(3.0 * math.log(2.0 / alpha) / k)) * k


def _repair(spec: ProblemSpec, support: np.ndarray) -> SparseEstimator:
    """Trim an over-budget support to k by dropping smallest |beta| from the
    refit on the full drawn support, then refit on the survivors."""
    if support.size <= spec.k:
        return restricted_estimator(spec, support)
    beta = _subset_coefficients(spec, support)
    order = np.argsort(np.abs(beta[support]), kind="stable")
    keep = np.sort(support[order[support.size - spec.k:]])
    return restricted_estimator(spec, keep)


def randomized_solve(
    spec: ProblemSpec,
    zhat: np.ndarray,
    trials: int = 100,
    seed: int = 0,
    repair: bool = True,
    alpha: float = 0.1,
) -> RandomizedResult:
    """Run ``trials`` independent roundings and keep the best draw.

    The best outcome minimizes the raw value f(z_tilde) (ties to the lowest
    trial index).  With ``repair`` on, every over-budget draw is trimmed to
    the budget and the best repaired estimator is reported alongside the
    raw statistics; ``p_exceed_bound`` is the fraction of draws whose
    cardinality exceeds ``cardinality_bound(k, alpha)``.
    """
    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    zhat = _check_zhat(zhat, spec.p)
    seed = int(seed)
    bound = cardinality_bound(spec.k, alpha)

    best: RoundingOutcome | None = None
    best_rep: SparseEstimator | None = None
    best_rep_raw: float | None = None
    cards = np.empty(trials)
    exceed = 0
    for t in range(trials):
        u = _trial_stream(seed, t).random(spec.p)
        z_tilde = (u <= zhat).astype(float)
        support = np.flatnonzero(z_tilde)
        value = mic_value(spec, z_tilde) if support.size else float(spec.y @ spec.y) / spec.n
        cards[t] = support.size
        if support.size > bound:
            exceed += 1
        if best is None or value < best.value:
            best = RoundingOutcome(
                support=tuple(support.tolist()),
                z_tilde=z_tilde,
                cardinality=int(support.size),
                value=value,
                seed=seed ^ t,
            )
        if repair:
            est = _repair(spec, support)
            if best_rep is None or est.objective < best_rep.objective:
                best_rep, best_rep_raw = est, value
    assert best is not None
    return RandomizedResult(
        best=best,
        best_repaired=best_rep,
        best_repaired_raw_value=best_rep_raw,
        trials=trials,
        mean_cardinality=float(cards.mean()),
        p_exceed_bound=exceed / trials,
        alpha=alpha,
    )


def trial_statistics_json(result: RandomizedResult) -> str:
    return json.dumps(result.to_json_dict())
