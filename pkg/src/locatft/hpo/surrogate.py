"""Random-forest surrogate with a predictive spread, and expected improvement."""

from __future__ import annotations

import numpy as np
from scipy.stats import norm
from sklearn.ensemble import RandomForestRegressor


class ForestSurrogate:
    """Bagged regression trees.

    The predictive variance is the spread of the per-tree means plus the
    average within-leaf variance of the training targets, so queries in
    poorly resolved leaves stay uncertain even when the trees agree.
    """

    def __init__(self, n_trees: int = 50, max_features: int = 2, min_samples_split: int = 4, seed: int = 0):
        self.forest = RandomForestRegressor(
            n_estimators=n_trees,
            max_features=max_features,
            min_samples_split=min_samples_split,
            bootstrap=True,
            random_state=seed,
        )

    def fit(self, X: np.ndarray, y: np.ndarray) -> "ForestSurrogate":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if len(y) < 1:
            raise ValueError("surrogate needs at least one observation")
        self.forest.set_params(max_features=min(self.forest.max_features, X.shape[1]))
        self.forest.fit(X, y)
        return self

    def predict(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=float)
        means = np.empty((len(self.forest.estimators_), X.shape[0]))
        leaf_var = np.empty_like(means)
        for i, tree in enumerate(self.forest.estimators_):
            leaves = tree.apply(X)
            means[i] = tree.tree_.value[leaves, 0, 0]
            leaf_var[i] = tree.tree_.impurity[leaves]
        m = means.mean(axis=0)
        var = means.var(axis=0) + leaf_var.mean(axis=0)
        return m, np.sqrt(np.maximum(var, 0.0))


def expected_improvement(mean, std, y_best: float) -> np.ndarray:
    """EI for minimisation; falls back to max(y_best - mean, 0) where std == 0."""
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    gap = y_best - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std > 0, gap / np.where(std > 0, std, 1.0), 0.0)
    ei = np.where(std > 0, gap * norm.cdf(z) + std * norm.pdf(z), np.maximum(gap, 0.0))
    return np.maximum(ei, 0.0)
