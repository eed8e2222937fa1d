"""Synthetic data generation and selection-accuracy metrics.

Rows of X are drawn i.i.d. from N(0, Sigma) with the banded correlation
Sigma_ij = rho^|i-j|; the draw applies the AR(1) Cholesky factor directly
as the recursion x_j = rho * x_{j-1} + sqrt(1 - rho^2) * z_j.  The first
``k_true`` coefficients are uniform on [coef_low, coef_high] (optionally
resampled away from zero so the true support is meaningful) and the noise
variance is set from the target signal-to-noise ratio
snr = var(x^T beta) / var(eps), i.e. sigma^2 = beta^T Sigma beta / snr.

Draw order (fixed, so results are reproducible given the seed): the n x p
standard-normal block for X, then the coefficient values, then the noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class SyntheticConfig:
    n: int
    p: int
    k_true: int
    rho: float = 0.5
    snr: float = 9.0
    coef_low: float = -3.0
    coef_high: float = 3.0
    seed: int = 0
    min_signal: float = 0.1
    resample_small: bool = True

    def __post_init__(self) -> None:
        if self.n < 1 or self.p < 1:
            raise InvalidArgumentError("n and p must be >= 1")
        if not 1 <= self.k_true <= self.p:
            raise InvalidArgumentError(f"k_true must lie in [1, p], got {self.k_true}")
        if not -1.0 < self.rho < 1.0:
            raise InvalidArgumentError(f"rho must lie in (-1, 1), got {self.rho}")
        if self.snr <= 0:
            raise InvalidArgumentError(f"snr must be positive, got {self.snr}")
        if self.coef_low >= self.coef_high:
            raise InvalidArgumentError("coef_low must be < coef_high")

    def to_json_dict(self) -> dict:
        return {
            "n": self.n, "p": self.p, "k_true": self.k_true, "rho": self.rho,
            "snr": self.snr, "coef_low": self.coef_low,
            "coef_high": self.coef_high, "seed": self.seed,
            "min_signal": self.min_signal, "resample_small": self.resample_small,
        }


def generate_synthetic(
    config: SyntheticConfig,
) -> tuple[Dataset, np.ndarray, tuple[int, ...], float]:
    """Returns (dataset, true_beta, true_support, sigma_sq)."""
    n, p, k = config.n, config.p, config.k_true
    rho = config.rho
    rng = np.random.default_rng(config.seed)

    Z = rng.standard_normal((n, p))
    X = np.empty((n, p))
    X[:, 0] = Z[:, 0]
    scale = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + scale * Z[:, j]

    coefs = rng.uniform(config.coef_low, config.coef_high, size=k)
    if config.resample_small:
        small = np.abs(coefs) < config.min_signal
        while small.any():
            coefs[small] = rng.uniform(
                config.coef_low, config.coef_high, size=int(small.sum())
            )
            small = np.abs(coefs) < config.min_signal
    beta0 = np.zeros(p)
    beta0[:k] = coefs

    # signal variance beta^T Sigma beta over the nonzero block only
    ii = np.arange(k)
    sigma_block = rho ** np.abs(ii[:, None] - ii[None, :])
    sigma_sq = float(coefs @ sigma_block @ coefs) / config.snr

    eps = rng.normal(0.0, math.sqrt(sigma_sq), size=n)
    y = X @ beta0 + eps
    return Dataset(X=X, y=y), beta0, tuple(range(k)), sigma_sq


def false_alarm_rate(estimated, truth, k: int) -> float:
    """Percentage of selected features outside the true support, over k."""
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    extra = set(int(i) for i in estimated) - set(int(i) for i in truth)
    return 100.0 * len(extra) / k
