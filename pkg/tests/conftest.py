"""Shared builders for randomized test instances."""

import warnings

import numpy as np

from ovnsvm import Dataset, MaxItersExceeded


def random_multilabel(rng, n, m, k) -> Dataset:
    """Random dataset where no row is empty and no class is empty."""
    X = rng.standard_normal((n, m))
    labels = (rng.uniform(size=(n, k)) < 0.4).astype(np.int64)
    for i in range(n):
        if labels[i].sum() == 0:
            labels[i, rng.integers(k)] = 1
    for c in range(k):
        if labels[:, c].sum() == 0:
            labels[rng.integers(n), c] = 1
    return Dataset(X, labels)


def random_multiclass(rng, n, m, k) -> Dataset:
    """Random dataset with exactly one label per row, every class present."""
    X = rng.standard_normal((n, m))
    y = rng.integers(k, size=n)
    y[:k] = np.arange(k)
    labels = np.zeros((n, k), dtype=np.int64)
    labels[np.arange(n), y] = 1
    return Dataset(X, labels)


class quiet_max_iters(warnings.catch_warnings):
    """Context manager silencing the iteration-cap warning in bulk fits."""

    def __enter__(self):
        log = super().__enter__()
        warnings.simplefilter("ignore", MaxItersExceeded)
        return log
