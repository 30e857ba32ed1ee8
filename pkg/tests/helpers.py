"""Shared fixtures-adjacent utilities for the test suite."""

import numpy as np

from oversim import Dataset


def make_dataset(X_raw, y, sensitive=(0,), names=None) -> Dataset:
    """Standardize a raw matrix by hand (divisor n) and wrap it as a Dataset.

    Independent of oversim.data.standardize so tests built on it do not
    inherit that function's bugs.
    """
    X_raw = np.asarray(X_raw, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    n, d = X_raw.shape
    mu = X_raw.mean(axis=0)
    sigma = np.sqrt(np.sum((X_raw - mu) ** 2, axis=0) / n)
    sigma = np.where(sigma == 0.0, 1.0, sigma)
    X = (X_raw - mu) / sigma
    if names is None:
        names = tuple(f"f{j}" for j in range(d))
    return Dataset(
        X=X,
        X_raw=X_raw,
        y=y,
        sensitive=tuple(sensitive),
        feature_names=tuple(names),
        mu=mu,
        sigma=sigma,
    )


def random_instance(rng, n=None, d=2, m=1):
    """A small random two-class instance for solver/oracle tests."""
    while True:
        nn = int(n if n is not None else rng.integers(4, 9))
        X_raw = rng.normal(size=(nn, d)) * rng.uniform(0.5, 3.0, size=d)
        y = rng.integers(0, 2, size=nn)
        if 0 < y.sum() < nn:
            return make_dataset(X_raw, y, sensitive=tuple(range(m)))


def grid_objective_max(data, w, ridge, lo=-3.0, hi=3.0, step=0.05) -> float:
    """Dense-grid maximum of the penalized log-likelihood over theta in
    [lo, hi]^3 (two coefficients + intercept; requires d = 2).

    Written independently of oversim.fairglm as a straight-line vectorized
    oracle: score matrix, log-likelihood, |c^T theta| penalties, ridge.
    """
    assert data.d == 2, "grid oracle covers exactly d = 2"
    axis = np.arange(lo, hi + step / 2, step)
    A, B, C = np.meshgrid(axis, axis, axis, indexing="ij")
    thetas = np.stack([A.ravel(), B.ravel(), C.ravel()], axis=1)  # G x 3
    Xb = np.hstack([data.X, np.ones((data.n, 1))])
    w = np.atleast_1d(np.asarray(w, dtype=float))
    centered = data.X_raw[:, data.sensitive] - data.X_raw[:, data.sensitive].mean(axis=0)
    cov = centered.T @ data.X / data.n  # m x d
    y = data.y.astype(float)
    best = -np.inf
    for chunk in np.array_split(thetas, 10):
        S = Xb @ chunk.T  # n x g
        loglik = y @ S - np.logaddexp(0.0, S).sum(axis=0)
        pen = w @ np.abs(cov @ chunk[:, :-1].T) if w.size else 0.0
        rid = 0.5 * ridge * (chunk[:, :-1] ** 2).sum(axis=1)
        best = max(best, float(np.max(loglik - pen - rid)))
    return best


def write_csv(path, names, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


VOLATILE_MANIFEST_PREFIXES = ("started_at=", "elapsed_seconds=")


def stable_manifest_lines(path) -> list:
    with open(path) as fh:
        return [
            line
            for line in fh.read().splitlines()
            if not line.startswith(VOLATILE_MANIFEST_PREFIXES)
        ]
