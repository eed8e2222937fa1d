"""Problem data model and core quantities for sparse ridge regression.

The problem solved throughout the package is

    minimize (1/n) * ||y - X beta||^2 + lam * ||beta||^2
    subject to ||beta||_0 <= k,

with design matrix ``X`` (n observations, p features), response ``y``,
ridge weight ``lam > 0`` and sparsity budget ``k``.  This module owns the
immutable containers (:class:`Dataset`, :class:`ProblemSpec`,
:class:`SparseEstimator`, :class:`SpectralStats`) plus the closed-form
pieces every solver builds on: the ridge objective, the exact estimator
restricted to a support set, the projected objective over binary feature
selections, and the extremal subset singular values used by the a-priori
quality bounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigvalsh

from .errors import BudgetExceededError, EnumerationCapError, InvalidArgumentError

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``X`` (n x p), response ``y`` (n,) and optional names.

    Arrays are copied and frozen at construction, so instances are safe to
    share across threads.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).ravel()
        if X.ndim != 2:
            raise InvalidArgumentError(f"X must be 2-D, got ndim={X.ndim}")
        n, p = X.shape
        if n < 1 or p < 1:
            raise InvalidArgumentError(f"X must be at least 1x1, got {X.shape}")
        if y.shape != (n,):
            raise InvalidArgumentError(
                f"y has length {y.shape[0]}, expected {n} (rows of X)"
            )
        if not np.isfinite(X).all() or not np.isfinite(y).all():
            raise InvalidArgumentError("X and y must be finite")
        names = self.feature_names
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != p:
                raise InvalidArgumentError(
                    f"feature_names has length {len(names)}, expected {p}"
                )
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class ProblemSpec:
    """A dataset together with the ridge weight ``lam`` and budget ``k``."""

    data: Dataset
    lam: float
    k: int

    def __post_init__(self) -> None:
        lam = float(self.lam)
        if not math.isfinite(lam) or lam <= 0.0:
            raise InvalidArgumentError(f"lam must be positive and finite, got {lam}")
        k = int(self.k)
        if k != self.k:
            raise InvalidArgumentError(f"k must be an integer, got {self.k}")
        if not 1 <= k <= min(self.data.n, self.data.p):
            raise InvalidArgumentError(
                f"k must satisfy 1 <= k <= min(n, p) = "
                f"{min(self.data.n, self.data.p)}, got {k}"
            )
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "k", k)

    @property
    def X(self) -> np.ndarray:
        return self.data.X

    @property
    def y(self) -> np.ndarray:
        return self.data.y

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def p(self) -> int:
        return self.data.p


@dataclass(frozen=True)
class SparseEstimator:
    """A solver output: support set, coefficient vector and objective value.

    ``beta`` has length p and is zero outside ``support``; ``objective`` is
    the ridge objective of ``beta`` on the originating problem.
    """

    support: tuple[int, ...]
    beta: np.ndarray
    objective: float

    def __post_init__(self) -> None:
        beta = np.array(self.beta, dtype=float)
        beta.setflags(write=False)
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "objective", float(self.objective))

    @property
    def cardinality(self) -> int:
        return len(self.support)

    def to_json_dict(self) -> dict:
        return {
            "support": list(self.support),
            "beta": self.beta.tolist(),
            "objective": self.objective,
        }


@dataclass(frozen=True)
class SpectralStats:
    """Extremal subset singular values driving the quality bounds.

    ``theta[s]`` is the largest eigenvalue of ``X_S X_S^T`` over all
    supports of size ``s`` (``theta[0] == 0``); ``underline_theta`` is the
    smallest eigenvalue of ``X_T X_T^T`` over all ``T`` with
    ``|T| >= p - k + 1``.  In ``upper_bound`` mode ``theta[s]`` is the sum
    of the ``s`` largest squared column norms (a valid upper bound) and
    ``underline_theta`` is 0 (a valid lower bound), so the derived ratio
    bound stays valid, just weaker.
    """

    theta: dict[int, float] = field(default_factory=dict)
    underline_theta: float = 0.0
    mode: str = "exact"


def ridge_objective(spec: ProblemSpec, beta: np.ndarray) -> float:
    """Evaluate (1/n)*||y - X beta||^2 + lam*||beta||^2."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (spec.p,):
        raise InvalidArgumentError(
            f"beta has shape {beta.shape}, expected ({spec.p},)"
        )
    if not np.isfinite(beta).all():
        raise InvalidArgumentError("beta must be finite")
    r = spec.y - spec.X @ beta
    return float(r @ r / spec.n + spec.lam * (beta @ beta))


def _clean_support(spec: ProblemSpec, S) -> np.ndarray:
    """Validate and sort a support set; returns an int array."""
    idx = np.asarray(sorted(set(int(i) for i in S)), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= spec.p):
        raise InvalidArgumentError(
            f"support indices must lie in [0, {spec.p}), got {idx.tolist()}"
        )
    return idx


def _subset_coefficients(spec: ProblemSpec, idx: np.ndarray) -> np.ndarray:
    """Length-p ridge solution restricted to ``idx`` (no budget check)."""
    beta = np.zeros(spec.p)
    if idx.size == 0:
        return beta
    Xs = spec.X[:, idx]
    K = Xs.T @ Xs + spec.n * spec.lam * np.eye(idx.size)
    beta[idx] = cho_solve(cho_factor(K), Xs.T @ spec.y)
    return beta


def restricted_estimator(spec: ProblemSpec, S) -> SparseEstimator:
    """Exact ridge fit on the support ``S`` (all other coefficients zero).

    Solves (X_S^T X_S + n*lam*I) beta_S = X_S^T y by Cholesky; lam > 0
    guarantees positive definiteness.  Raises
    :class:`~sparseridge.errors.BudgetExceededError` when ``|S| > k``.
    """
    idx = _clean_support(spec, S)
    if idx.size > spec.k:
        raise BudgetExceededError(
            f"support of size {idx.size} exceeds the budget k={spec.k}"
        )
    beta = _subset_coefficients(spec, idx)
    return SparseEstimator(
        support=tuple(idx.tolist()),
        beta=beta,
        objective=ridge_objective(spec, beta),
    )


def _support_from_z(spec: ProblemSpec, z) -> np.ndarray:
    """Interpret ``z`` as a binary indicator vector or an index set.

    A length-p array whose entries are all 0/1 is read as an indicator;
    anything else must be a collection of distinct feature indices.
    """
    if isinstance(z, (set, frozenset)):
        return _clean_support(spec, z)
    arr = np.asarray(z)
    if arr.ndim == 1 and arr.shape[0] == spec.p:
        as_float = arr.astype(float)
        on = np.abs(as_float - 1.0) <= 1e-12
        off = np.abs(as_float) <= 1e-12
        if np.all(on | off):
            return np.flatnonzero(on)
        if not np.issubdtype(arr.dtype, np.integer):
            raise InvalidArgumentError(
                "z of length p must be binary (entries 0 or 1)"
            )
    return _clean_support(spec, np.atleast_1d(arr).tolist())


def mic_value(spec: ProblemSpec, z) -> float:
    """Projected objective f(z) = lam * y^T [n*lam*I + sum z_i x_i x_i^T]^-1 y.

    ``z`` is a binary indicator vector or an index set.  For a support S
    this equals the ridge objective of the exact fit on S.  Computed
    through the restricted p-side system when ``|S| <= n`` and through the
    n x n system otherwise (both routes agree; tested).
    """
    idx = _support_from_z(spec, z)
    y = spec.y
    n, lam = spec.n, spec.lam
    if idx.size <= n:
        beta = _subset_coefficients(spec, idx)
        c = spec.X[:, idx].T @ y
        return float((y @ y - c @ beta[idx]) / n)
    Xs = spec.X[:, idx]
    A = n * lam * np.eye(n) + Xs @ Xs.T
    u = cho_solve(cho_factor(A), y)
    return float(lam * (y @ u))


def _max_eig_gram(G: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric PSD matrix."""
    if G.shape[0] == 1:
        return float(G[0, 0])
    return float(eigvalsh(G, subset_by_index=[G.shape[0] - 1, G.shape[0] - 1])[0])


def theta(
    spec: ProblemSpec,
    s: int,
    mode: str = "exact",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Largest eigenvalue of X_S X_S^T over all supports of size ``s``.

    ``exact`` mode enumerates every size-s subset (requires C(p, s) <= cap);
    ``upper_bound`` mode returns the sum of the ``s`` largest squared column
    norms, which dominates the exact value.
    """
    s = int(s)
    if not 1 <= s <= spec.p:
        raise InvalidArgumentError(f"s must lie in [1, {spec.p}], got {s}")
    if mode == "upper_bound":
        sq = np.sum(spec.X**2, axis=0)
        return float(np.sort(sq)[-s:].sum())
    if mode != "exact":
        raise InvalidArgumentError(f"unknown mode {mode!r}")
    count = math.comb(spec.p, s)
    if count > cap:
        raise EnumerationCapError(
            f"C({spec.p}, {s}) = {count} exceeds the cap {cap}; "
            "use mode='upper_bound'"
        )
    G = spec.X.T @ spec.X
    best = 0.0
    for S in itertools.combinations(range(spec.p), s):
        ix = np.asarray(S)
        best = max(best, _max_eig_gram(G[np.ix_(ix, ix)]))
    return best


def underline_theta(spec: ProblemSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Smallest eigenvalue of X_T X_T^T over all T with |T| >= p - k + 1.

    Whenever p - k + 1 < n every size-(p-k+1) subset is rank deficient and
    the minimum is 0 without enumeration.  Otherwise all admissible sizes
    are enumerated (their total count must stay within the cap).
    """
    n, p, k = spec.n, spec.p, spec.k
    t_min = p - k + 1
    if t_min < n:
        return 0.0
    total = sum(math.comb(p, t) for t in range(t_min, p + 1))
    if total > cap:
        raise EnumerationCapError(
            f"enumerating {total} subsets of size >= {t_min} exceeds the cap {cap}"
        )
    best = math.inf
    X = spec.X
    for t in range(t_min, p + 1):
        for T in itertools.combinations(range(p), t):
            Xt = X[:, np.asarray(T)]
            G = Xt @ Xt.T
            low = float(eigvalsh(G, subset_by_index=[0, 0])[0])
            best = min(best, max(0.0, low))
    return float(best)


def spectral_stats(
    spec: ProblemSpec,
    mode: str = "exact",
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> SpectralStats:
    """theta_s for s = 0..k plus underline_theta, as one bundle."""
    thetas = {0: 0.0}
    for s in range(1, spec.k + 1):
        thetas[s] = theta(spec, s, mode=mode, cap=cap)
    if mode == "exact":
        under = underline_theta(spec, cap=cap)
    else:
        under = 0.0
    return SpectralStats(theta=thetas, underline_theta=under, mode=mode)


def normalize_columns(data: Dataset) -> Dataset:
    """Rescale every column of X to squared norm n (zero columns untouched)."""
    X = data.X.copy()
    norms = np.linalg.norm(X, axis=0)
    nz = norms > 0
    X[:, nz] *= math.sqrt(data.n) / norms[nz]
    return Dataset(X=X, y=data.y, feature_names=data.feature_names)
