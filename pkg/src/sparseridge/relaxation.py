"""Continuous relaxations of the cardinality-constrained ridge problem.

Four relaxation values are computed, named ``v1`` .. ``v4`` after the
formulation they relax:

* ``v1`` -- big-M linking ``|beta_i| <= M_i z_i`` with ``z`` relaxed to the
  capped box (solved with ``z`` eliminated, as a weighted-L1-ball plus box
  constrained ridge problem);
* ``v2`` -- perspective (conic) strengthening ``beta_i^2 <= mu_i z_i``;
* ``v3`` -- perspective and big-M constraints together;
* ``v4`` -- the projected objective ``f(z) = lam * y^T A(z)^{-1} y`` with
  ``A(z) = n*lam*I + sum_i z_i x_i x_i^T`` minimized directly over the
  capped box.

``v2`` and ``v4`` coincide (one is an exact reformulation of the other),
which the test suite exploits as a cross-solver check.  The perspective
constraint set is the convex hull of its mixed-binary counterpart, so v2
cannot be improved by adding valid inequalities in the same variables;
tightening requires outside information such as the big-M bounds (v3).
All solvers are first order: projected gradient with Armijo backtracking
(constant 1e-4, step halving) for ``v1``/``v4``, exact alternating
minimization for ``v2``/``v3`` whose z-subproblem is the water-filling
allocation below.

A conditional-value-at-risk style convex surrogate of the cardinality
constraint is deliberately not offered: for this constraint it admits only
beta = 0 as a feasible point, so it can never return anything useful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigvalsh

from .core import ProblemSpec
from .errors import InvalidArgumentError, NumericalDomainError

ARMIJO_C = 1e-4
_Z_FLOOR = 1e-14


@dataclass(frozen=True)
class RelaxationSolution:
    """Fractional selection vector with its value and solve diagnostics."""

    z: np.ndarray
    value: float
    iterations: int
    kkt_residual: float
    converged: bool
    beta: np.ndarray | None = None

    def __post_init__(self) -> None:
        z = np.array(self.z, dtype=float)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        if self.beta is not None:
            b = np.array(self.beta, dtype=float)
            b.setflags(write=False)
            object.__setattr__(self, "beta", b)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "z": self.z.tolist(),
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class BigMVector:
    """Per-coordinate coefficient bounds plus the inputs that produced them."""

    M: np.ndarray
    v_upper: float
    rho: float

    def __post_init__(self) -> None:
        M = np.array(self.M, dtype=float)
        M.setflags(write=False)
        object.__setattr__(self, "M", M)


def project_capped_simplex(v: np.ndarray, k: float) -> np.ndarray:
    """Euclidean projection onto {z in [0,1]^p : sum(z) <= k}.

    If the clipped point already fits the budget it is returned unchanged;
    otherwise the unique shift tau > 0 with sum(clip(v - tau, 0, 1)) == k
    is located exactly on the piecewise-linear breakpoint grid.
    """
    if k <= 0:
        raise InvalidArgumentError(f"budget k must be positive, got {k}")
    v = np.asarray(v, dtype=float)
    clipped = np.clip(v, 0.0, 1.0)
    total = clipped.sum()
    if total <= k:
        return clipped

    def budget_at(tau: float) -> float:
        return float(np.clip(v - tau, 0.0, 1.0).sum())

    # sum(clip(v - tau, 0, 1)) is piecewise linear in tau with breakpoints
    # at v_i and v_i - 1; bracket the crossing, then solve the linear piece.
    bps = np.unique(np.concatenate([v, v - 1.0]))
    bps = bps[bps > 0.0]
    lo, hi = 0.0, float(bps[-1])
    h_lo = total
    for b in bps:
        h_b = budget_at(b)
        if h_b <= k:
            hi = float(b)
            break
        lo, h_lo = float(b), h_b
    mid = 0.5 * (lo + hi)
    active = int(np.count_nonzero((v - mid > 0.0) & (v - mid < 1.0)))
    tau = lo if active == 0 else lo + (h_lo - k) / active
    return np.clip(v - tau, 0.0, 1.0)


def waterfill_z(
    beta: np.ndarray, k: float, lower: np.ndarray | None = None
) -> np.ndarray:
    """Minimize sum(beta_i^2 / z_i) over {lower <= z <= 1, sum(z) <= k}.

    Coordinates with beta_i == 0 contribute nothing (0/0 := 0) and stay at
    their lower bound.  When the budget binds, z_i = clamp(|beta_i|/nu,
    lower_i, 1) with the level nu found by bisection to 1e-12 on the budget
    residual.
    """
    beta = np.asarray(beta, dtype=float)
    p = beta.shape[0]
    if lower is None:
        lower = np.zeros(p)
    else:
        lower = np.asarray(lower, dtype=float)
        if lower.shape != (p,) or np.any(lower < -1e-15) or np.any(lower > 1 + 1e-12):
            raise InvalidArgumentError("lower bounds must lie in [0, 1]")
        lower = np.clip(lower, 0.0, 1.0)
    if lower.sum() > k + 1e-9:
        raise InvalidArgumentError(
            f"lower bounds sum to {lower.sum():.6g} > budget {k}"
        )
    if lower.sum() >= k - 1e-12:
        return lower.copy()  # bounds alone exhaust the budget
    absb = np.abs(beta)
    nz = absb > 0.0
    if not nz.any():
        return lower.copy()
    capped = np.where(nz, 1.0, lower)
    if capped.sum() <= k:
        return capped

    def z_at(nu: float) -> np.ndarray:
        return np.where(nz, np.clip(absb / nu, lower, 1.0), lower)

    lo = float(absb[nz].min())  # all nonzero coords at 1: sum > k
    hi = float(absb.max())
    for _ in range(200):
        if z_at(hi).sum() <= k:
            break
        hi *= 2.0
    else:
        return lower.copy()  # infimum sum(z) is sum(lower) ~ k
    for _ in range(200):
        nu = 0.5 * (lo + hi)
        resid = z_at(nu).sum() - k
        if abs(resid) <= 1e-12:
            break
        if resid > 0.0:
            lo = nu
        else:
            hi = nu
    else:
        nu = hi  # feasible side
    return z_at(nu)


def big_m(spec: ProblemSpec, v_upper: float | None = None) -> BigMVector:
    """Closed-form coefficient bounds valid for every solution at level v_upper.

    Any beta with ridge objective <= v_upper satisfies
    rho * (beta_i - a_i)^2 <= D with rho = sigma_min(X^T X)/n + lam,
    a_i = x_i^T y / (n rho) and D = ||X^T y||^2/(n^2 rho^2) + v_upper/rho
    - ||y||^2/(n rho), hence |beta_i| <= |a_i| + sqrt(D).  Defaults to the
    always-valid level v_upper = ||y||^2 / n (attained by beta = 0).
    """
    X, y, n = spec.X, spec.y, spec.n
    G = X.T @ X
    sig_min = max(0.0, float(eigvalsh(G, subset_by_index=[0, 0])[0]))
    rho = sig_min / n + spec.lam
    yy = float(y @ y)
    v_up = yy / n if v_upper is None else float(v_upper)
    c = X.T @ y
    a = c / (n * rho)
    disc = float(c @ c) / (n * rho) ** 2 + v_up / rho - yy / (n * rho)
    if disc < -1e-12 * max(1.0, yy):
        raise NumericalDomainError(
            f"negative discriminant {disc:.3g}: v_upper={v_up:.6g} is below "
            "the attainable minimum; raise it"
        )
    s = np.sqrt(max(0.0, disc))
    return BigMVector(M=np.abs(a) + s, v_upper=v_up, rho=rho)


def value_and_gradient(spec: ProblemSpec, z: np.ndarray) -> tuple[float, np.ndarray]:
    """f(z) = lam*y^T A(z)^{-1} y and its gradient -lam*(x_i^T A(z)^{-1} y)^2."""
    z = np.asarray(z, dtype=float)
    if z.shape != (spec.p,):
        raise InvalidArgumentError(f"z has shape {z.shape}, expected ({spec.p},)")
    if np.any(z < -1e-12) or not np.isfinite(z).all():
        raise InvalidArgumentError("z must be finite and nonnegative")
    z = np.maximum(z, 0.0)
    X, y, n, lam = spec.X, spec.y, spec.n, spec.lam
    A = n * lam * np.eye(n) + (X * z) @ X.T
    u = cho_solve(cho_factor(A), y)
    g = X.T @ u
    return float(lam * (y @ u)), -lam * g**2


def _masked_sets(spec, fixed_one, fixed_zero):
    one = sorted(set(int(i) for i in fixed_one))
    zero = sorted(set(int(i) for i in fixed_zero))
    if set(one) & set(zero):
        raise InvalidArgumentError("fixed_one and fixed_zero must be disjoint")
    for i in one + zero:
        if not 0 <= i < spec.p:
            raise InvalidArgumentError(f"fixed index {i} out of range")
    if len(one) > spec.k:
        raise InvalidArgumentError("more fixed-one indices than the budget k")
    free = [i for i in range(spec.p) if i not in set(one) | set(zero)]
    return np.asarray(one, dtype=int), np.asarray(zero, dtype=int), np.asarray(free, dtype=int)


def solve_v4(
    spec: ProblemSpec,
    tol: float = 1e-7,
    max_iter: int = 5000,
    fixed_one=(),
    fixed_zero=(),
    z0: np.ndarray | None = None,
) -> RelaxationSolution:
    """Minimize f(z) over the capped box by monotone projected gradient.

    ``fixed_one`` / ``fixed_zero`` pin coordinates of z at 1 / 0 (used by
    the exact solver's tree search); the remaining coordinates are
    optimized over the budget k - |fixed_one|.  The KKT residual is the
    norm of z - project(z - grad f(z)).
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    one, zero, free = _masked_sets(spec, fixed_one, fixed_zero)
    X, y, n, lam = spec.X, spec.y, spec.n, spec.lam
    budget = spec.k - one.size

    z_full = np.zeros(spec.p)
    z_full[one] = 1.0

    def finish(z_free, value, iters, resid, converged):
        z_out = z_full.copy()
        z_out[free] = z_free
        return RelaxationSolution(
            z=z_out, value=value, iterations=iters,
            kkt_residual=resid, converged=converged,
        )

    if free.size == 0 or budget <= 0:
        val, _ = value_and_gradient(spec, z_full)
        return finish(np.zeros(free.size), val, 0, 0.0, True)
    if budget >= free.size:
        # f decreases in every coordinate, so the saturated box is optimal.
        z_full[free] = 1.0
        val, _ = value_and_gradient(spec, z_full)
        return finish(np.ones(free.size), val, 0, 0.0, True)

    Xf = X[:, free]
    base = n * lam * np.eye(n)
    if one.size:
        Xo = X[:, one]
        base = base + Xo @ Xo.T

    def fval_grad(zf):
        A = base + (Xf * zf) @ Xf.T
        u = cho_solve(cho_factor(A), y)
        return float(lam * (y @ u)), -lam * (Xf.T @ u) ** 2

    if z0 is not None:
        zf = project_capped_simplex(np.asarray(z0, dtype=float)[free], budget)
    else:
        zf = np.full(free.size, budget / free.size)
    val, grad = fval_grad(zf)
    step = 1.0
    resid = np.inf
    iters = 0
    converged = False
    for iters in range(1, max_iter + 1):
        resid = float(np.linalg.norm(zf - project_capped_simplex(zf - grad, budget)))
        if resid <= tol:
            converged = True
            break
        step = min(step * 2.0, 1e12)
        while True:
            z_new = project_capped_simplex(zf - step * grad, budget)
            dz = z_new - zf
            val_new, grad_new = fval_grad(z_new)
            if val_new <= val + ARMIJO_C * float(grad @ dz):
                break
            step *= 0.5
            if step < 1e-18:
                z_new, val_new, grad_new = zf, val, grad
                break
        if np.array_equal(z_new, zf):
            # No descent step available: the projected point is stationary.
            resid = float(
                np.linalg.norm(zf - project_capped_simplex(zf - grad, budget))
            )
            converged = resid <= tol
            break
        zf, val, grad = z_new, val_new, grad_new
    return finish(zf, val, iters, resid, converged)


def _weighted_ridge(spec: ProblemSpec, z: np.ndarray) -> np.ndarray:
    """argmin (1/n)||y - X b||^2 + lam*sum(b_i^2 / z_i); b_i = 0 where z_i ~ 0.

    Solved through the |active| x |active| normal equations, or through the
    equivalent n x n system beta_i = z_i * x_i^T (n*lam*I + X diag(z) X^T)^-1 y
    when the active set is wider than n.
    """
    beta = np.zeros(spec.p)
    active = np.flatnonzero(z > _Z_FLOOR)
    if active.size == 0:
        return beta
    Xa = spec.X[:, active]
    za = z[active]
    if active.size > spec.n:
        A = spec.n * spec.lam * np.eye(spec.n) + (Xa * za) @ Xa.T
        u = cho_solve(cho_factor(A), spec.y)
        beta[active] = za * (Xa.T @ u)
    else:
        K = Xa.T @ Xa + spec.n * spec.lam * np.diag(1.0 / za)
        beta[active] = cho_solve(cho_factor(K), Xa.T @ spec.y)
    return beta


def _perspective_value(spec: ProblemSpec, beta: np.ndarray, z: np.ndarray) -> float:
    r = spec.y - spec.X @ beta
    pen = np.zeros_like(beta)
    nz = np.abs(beta) > 0
    pen[nz] = beta[nz] ** 2 / z[nz]
    return float(r @ r / spec.n + spec.lam * pen.sum())


def solve_v2_perspective(
    spec: ProblemSpec, tol: float = 1e-9, max_iter: int = 50000
) -> RelaxationSolution:
    """Perspective relaxation value by exact alternating minimization.

    With the auxiliary bound mu_i eliminated (mu_i = beta_i^2 / z_i at any
    optimum), the beta-step is a weighted ridge solve and the z-step is
    water-filling.  Stops when a full cycle decreases the value by at most
    ``tol``; the initial z is interior so no coordinate is pinned to the
    0/0 face by accident.
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    z = np.full(spec.p, min(1.0, spec.k / spec.p))
    beta = np.zeros(spec.p)
    prev = np.inf
    val = np.inf
    converged = False
    iters = 0
    decrease = np.inf
    for iters in range(1, max_iter + 1):
        beta = _weighted_ridge(spec, z)
        z = waterfill_z(beta, spec.k, lower=None)
        val = _perspective_value(spec, beta, z)
        decrease = prev - val
        if decrease <= tol:
            converged = True
            break
        prev = val
    return RelaxationSolution(
        z=z, value=val, iterations=iters,
        kkt_residual=float(abs(decrease)) if np.isfinite(decrease) else np.inf,
        converged=converged, beta=beta,
    )


def _project_weighted_l1_box(v: np.ndarray, M: np.ndarray, k: float) -> np.ndarray:
    """Projection onto {b : sum(|b_i|/M_i) <= k, |b_i| <= M_i}."""
    b = np.clip(v, -M, M)
    if float(np.sum(np.abs(b) / M)) <= k + 1e-15:
        return b

    def shrink(tau: float) -> np.ndarray:
        return np.sign(v) * np.minimum(M, np.maximum(0.0, np.abs(v) - tau / M))

    lo, hi = 0.0, float(np.max(np.abs(v) * M))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if float(np.sum(np.abs(shrink(mid)) / M)) > k:
            lo = mid
        else:
            hi = mid
    return shrink(hi)


def solve_v1(
    spec: ProblemSpec,
    M: BigMVector,
    tol: float = 1e-8,
    max_iter: int = 20000,
) -> RelaxationSolution:
    """Big-M relaxation value by projected gradient with z eliminated.

    Feasibility in (beta, z) reduces to sum(|beta_i|/M_i) <= k and
    |beta_i| <= M_i, so the ridge objective is minimized over a weighted-L1
    ball intersected with a box.
    """
    Mv = M.M
    if np.any(Mv <= 0):
        raise InvalidArgumentError("all big-M entries must be positive")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    X, y, n, lam, k = spec.X, spec.y, spec.n, spec.lam, spec.k
    G2 = 2.0 * (X.T @ X) / n
    c2 = 2.0 * (X.T @ y) / n

    def obj(b):
        r = y - X @ b
        return float(r @ r / n + lam * (b @ b))

    def grad(b):
        return G2 @ b - c2 + 2.0 * lam * b

    beta = _project_weighted_l1_box(np.linalg.solve(X.T @ X / n + lam * np.eye(spec.p), X.T @ y / n), Mv, k)
    val = obj(beta)
    g = grad(beta)
    step = 1.0
    resid = np.inf
    converged = False
    iters = 0
    for iters in range(1, max_iter + 1):
        resid = float(np.linalg.norm(beta - _project_weighted_l1_box(beta - g, Mv, k)))
        if resid <= tol:
            converged = True
            break
        step = min(step * 2.0, 1e12)
        while True:
            b_new = _project_weighted_l1_box(beta - step * g, Mv, k)
            db = b_new - beta
            val_new = obj(b_new)
            if val_new <= val + ARMIJO_C * float(g @ db):
                break
            step *= 0.5
            if step < 1e-18:
                b_new, val_new = beta, val
                break
        if np.array_equal(b_new, beta):
            resid = float(
                np.linalg.norm(beta - _project_weighted_l1_box(beta - g, Mv, k))
            )
            converged = resid <= tol
            break
        beta, val = b_new, val_new
        g = grad(beta)
    z = np.abs(beta) / Mv
    return RelaxationSolution(
        z=z, value=val, iterations=iters, kkt_residual=resid,
        converged=converged, beta=beta,
    )


def _box_weighted_ridge_cd(
    spec: ProblemSpec,
    z: np.ndarray,
    M: np.ndarray,
    beta0: np.ndarray,
    sweeps: int = 2000,
    tol: float = 1e-13,
) -> np.ndarray:
    """Coordinate descent for min (1/n)||y-Xb||^2 + lam*sum(b_i^2/z_i)
    subject to |b_i| <= M_i z_i.  Exact clamped updates; strongly convex."""
    X, y, n, lam = spec.X, spec.y, spec.n, spec.lam
    p = spec.p
    beta = beta0.copy()
    bound = M * z
    beta = np.clip(beta, -bound, bound)
    beta[z <= _Z_FLOOR] = 0.0
    r = y - X @ beta
    colsq = np.sum(X**2, axis=0) / n
    for _ in range(sweeps):
        max_delta = 0.0
        for i in range(p):
            if z[i] <= _Z_FLOOR:
                if beta[i] != 0.0:
                    r += X[:, i] * beta[i]
                    beta[i] = 0.0
                continue
            a = colsq[i] + lam / z[i]
            c = float(X[:, i] @ r) / n + colsq[i] * beta[i]
            b_new = min(bound[i], max(-bound[i], c / a))
            d = b_new - beta[i]
            if d != 0.0:
                r -= X[:, i] * d
                beta[i] = b_new
                max_delta = max(max_delta, abs(d))
        if max_delta <= tol * max(1.0, float(np.abs(beta).max())):
            break
    return beta


def solve_v3(
    spec: ProblemSpec,
    M: BigMVector,
    tol: float = 1e-9,
    max_iter: int = 20000,
) -> RelaxationSolution:
    """Perspective-plus-big-M relaxation value by alternating minimization.

    The beta-step is a box-constrained weighted ridge solved exactly by
    coordinate descent; the z-step is water-filling with per-coordinate
    lower bounds |beta_i| / M_i keeping the linking constraints feasible.
    """
    Mv = M.M
    if np.any(Mv <= 0):
        raise InvalidArgumentError("all big-M entries must be positive")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    z = np.full(spec.p, min(1.0, spec.k / spec.p))
    beta = np.zeros(spec.p)
    prev = np.inf
    val = np.inf
    converged = False
    iters = 0
    decrease = np.inf
    for iters in range(1, max_iter + 1):
        beta = _box_weighted_ridge_cd(spec, z, Mv, beta)
        z = waterfill_z(beta, spec.k, lower=np.abs(beta) / Mv)
        val = _perspective_value(spec, beta, z)
        decrease = prev - val
        if decrease <= tol:
            converged = True
            break
        prev = val
    return RelaxationSolution(
        z=z, value=val, iterations=iters,
        kkt_residual=float(abs(decrease)) if np.isfinite(decrease) else np.inf,
        converged=converged, beta=beta,
    )
