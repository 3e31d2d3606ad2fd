"""Least-squares gradient boosting on axis-aligned regression trees.

Trees are grown by exhaustive greedy split search over midpoints of
consecutive distinct feature values. A split is taken only if it strictly
reduces the squared error, and ties are broken toward the lowest feature
index, then the lowest threshold, so fitting is fully deterministic (no
subsampling anywhere). Prediction is

    base_prediction + learning_rate * sum(tree(x) for tree in trees)

with base_prediction the training-target mean.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from sklearn.base import BaseEstimator

from .data import PanelDataset, SpatialGraph
from .errors import InvalidConfig, TooFewRows
from .linalg import DesignMatrix

_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class GbmHyperparams:
    n_trees: int = 50
    max_depth: int = 2
    min_samples_leaf: int = 5
    learning_rate: float = 0.1

    def __post_init__(self):
        if self.n_trees < 0:
            raise InvalidConfig("n_trees", "must be >= 0")
        if self.max_depth < 1:
            raise InvalidConfig("max_depth", "must be >= 1")
        if self.min_samples_leaf < 1:
            raise InvalidConfig("min_samples_leaf", "must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise InvalidConfig("learning_rate", "must be in (0, 1]")


@dataclass(frozen=True)
class Leaf:
    value: float
    n_samples: int


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[Leaf, Split]


@dataclass(frozen=True)
class GbmModel:
    base_prediction: float
    trees: tuple[Node, ...]
    learning_rate: float
    hyperparams: GbmHyperparams


def _best_split(x: np.ndarray, residual: np.ndarray,
                min_leaf: int) -> Optional[tuple[int, float]]:
    """Exhaustive search for the SSE-minimizing split, or None if no split
    strictly improves on the parent leaf."""
    n = x.shape[0]
    parent_sse = float(((residual - residual.mean()) ** 2).sum())
    best: Optional[tuple[int, float]] = None
    best_gain = _MIN_GAIN * max(parent_sse, 1.0)
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs, rs = x[order, f], residual[order]
        left_sum = np.cumsum(rs)[:-1]
        left_sq = np.cumsum(rs * rs)[:-1]
        total, total_sq = left_sum[-1] + rs[-1], left_sq[-1] + rs[-1] ** 2
        counts = np.arange(1, n)
        sse = ((left_sq - left_sum**2 / counts)
               + (total_sq - left_sq) - (total - left_sum) ** 2 / (n - counts))
        for pos in range(min_leaf - 1, n - min_leaf):
            if xs[pos] == xs[pos + 1]:
                continue
            gain = parent_sse - float(sse[pos])
            if gain > best_gain:
                best_gain = gain
                best = (f, float((xs[pos] + xs[pos + 1]) / 2.0))
    return best


def _grow_tree(x: np.ndarray, residual: np.ndarray, depth: int,
               params: GbmHyperparams) -> Node:
    n = x.shape[0]
    if depth >= params.max_depth or n < 2 * params.min_samples_leaf:
        return Leaf(float(residual.mean()), n)
    found = _best_split(x, residual, params.min_samples_leaf)
    if found is None:
        return Leaf(float(residual.mean()), n)
    feature, threshold = found
    mask = x[:, feature] <= threshold
    return Split(feature, threshold,
                 _grow_tree(x[mask], residual[mask], depth + 1, params),
                 _grow_tree(x[~mask], residual[~mask], depth + 1, params))


def _tree_predict(node: Node, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Leaf):
        return np.full(x.shape[0], node.value)
    mask = x[:, node.feature] <= node.threshold
    out = np.empty(x.shape[0])
    out[mask] = _tree_predict(node.left, x[mask])
    out[~mask] = _tree_predict(node.right, x[~mask])
    return out


def fit_gbm(features: DesignMatrix, hyperparams: GbmHyperparams = GbmHyperparams()
            ) -> GbmModel:
    """Boost trees against the running residual of the squared-error loss."""
    if features.rows < 2 * hyperparams.min_samples_leaf:
        raise TooFewRows(f"need at least {2 * hyperparams.min_samples_leaf} rows, "
                         f"got {features.rows}")
    x, y = features.values, features.target
    base = float(y.mean())
    residual = y - base
    trees = []
    for _ in range(hyperparams.n_trees):
        tree = _grow_tree(x, residual, 0, hyperparams)
        residual = residual - hyperparams.learning_rate * _tree_predict(tree, x)
        trees.append(tree)
    return GbmModel(base, tuple(trees), hyperparams.learning_rate, hyperparams)


def gbm_predict(model: GbmModel, row: np.ndarray) -> float:
    """Prediction for a single feature vector."""
    x = np.asarray(row, dtype=float).reshape(1, -1)
    return float(model.base_prediction
                 + model.learning_rate
                 * sum(_tree_predict(t, x)[0] for t in model.trees))


def gbm_predict_many(model: GbmModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape[0], model.base_prediction)
    for tree in model.trees:
        out += model.learning_rate * _tree_predict(tree, x)
    return out


def fit_unit_gbms(panel: PanelDataset, graph: SpatialGraph,
                  hyperparams: GbmHyperparams = GbmHyperparams()
                  ) -> dict[int, GbmModel]:
    """One independent model per unit on (treatment, own lag, neighbor lag)."""
    from .estimators import build_unit_features
    return {i: fit_gbm(build_unit_features(panel, graph, i), hyperparams)
            for i in range(panel.n_units)}


class GradientBoostedDynamics(BaseEstimator):
    """Estimator-style wrapper fitting one boosted model per unit."""

    def __init__(self, n_trees: int = 50, max_depth: int = 2,
                 min_samples_leaf: int = 5, learning_rate: float = 0.1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.learning_rate = learning_rate

    def fit(self, panel: PanelDataset, graph: SpatialGraph):
        params = GbmHyperparams(self.n_trees, self.max_depth,
                                self.min_samples_leaf, self.learning_rate)
        self.models_ = fit_unit_gbms(panel, graph, params)
        self.panel_ = panel
        self.graph_ = graph
        return self

    def estimate_ate(self, horizon: Optional[int] = None,
                     mode: str = "observed-lag"):
        from .gcomp import estimate_ate
        return estimate_ate(self.models_, self.panel_, self.graph_,
                            horizon=horizon, mode=mode)
