import numpy as np

from sparseridge import Dataset, ProblemSpec


def identity_pair_spec(lam=0.1, k=1):
    """The 2-feature identity-design instance with y = (1, 1).

    Closed forms: optimum lam/(1+2*lam) + 1/2 on a single feature,
    perspective/projected relaxation value 4*lam/(1+4*lam), big-M
    relaxation value 2*lam/(1+2*lam) under the loose bound sqrt(1/lam).
    """
    return ProblemSpec(data=Dataset(X=np.eye(2), y=np.array([1.0, 1.0])), lam=lam, k=k)


def random_spec(rng, n, p, k, lam, signal=True):
    X = rng.standard_normal((n, p))
    if signal:
        y = X[:, :k] @ rng.uniform(-2.0, 2.0, size=k) + 0.5 * rng.standard_normal(n)
    else:
        y = rng.standard_normal(n)
    return ProblemSpec(data=Dataset(X=X, y=y), lam=lam, k=k)
