"""Random forest of Gini-split CART trees on bootstrap samples.

Each tree draws a bootstrap of the training rows, then at every node
samples ceil(sqrt(d)) candidate features without replacement and takes the
threshold minimizing weighted Gini impurity. Trees grow until nodes are
pure, have fewer than two rows, or no sampled feature separates the rows.
Draw order is fixed (per tree: bootstrap, then node draws in preorder), so
one seed fully determines the forest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import TrainMeta, check_predict_input

_LEAF = -1


@dataclass
class Tree:
    """Flat array form; feature == -1 marks a leaf and value holds its vote."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict_value(self, features: np.ndarray) -> np.ndarray:
        n = features.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = self.feature[node] != _LEAF
        while np.any(active):
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = features[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active[rows] = self.feature[node[rows]] != _LEAF
        return self.value[node]


class _TreeBuilder:
    def __init__(self):
        self.feature, self.threshold = [], []
        self.left, self.right, self.value = [], [], []

    def add_leaf(self, value: float) -> int:
        idx = len(self.feature)
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(value)
        return idx

    def add_split(self, feature: int, threshold: float) -> int:
        idx = len(self.feature)
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(0.0)
        return idx

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=np.float64),
        )


def _best_gini_split(values: np.ndarray, labels: np.ndarray):
    """Best (weighted_gini, threshold) along one feature, or None."""
    order = np.argsort(values, kind="mergesort")
    v = values[order]
    y = labels[order]
    boundaries = np.flatnonzero(v[1:] > v[:-1])
    if boundaries.size == 0:
        return None
    m = v.size
    total_pos = float(y.sum())
    pos_prefix = np.cumsum(y)[boundaries].astype(np.float64)
    n_left = (boundaries + 1).astype(np.float64)
    n_right = m - n_left
    pos_right = total_pos - pos_prefix
    p_l = pos_prefix / n_left
    p_r = pos_right / n_right
    gini_l = 1.0 - p_l ** 2 - (1.0 - p_l) ** 2
    gini_r = 1.0 - p_r ** 2 - (1.0 - p_r) ** 2
    weighted = (n_left * gini_l + n_right * gini_r) / m
    best = int(np.argmin(weighted))
    b = boundaries[best]
    threshold = 0.5 * (v[b] + v[b + 1])
    # midpoint of adjacent floats can round onto the right value; fall back
    # to the left value so the comparison still separates the two rows
    if not (v[b] <= threshold < v[b + 1]):
        threshold = float(v[b])
    return float(weighted[best]), float(threshold)


def _majority(labels: np.ndarray) -> float:
    ones = int(labels.sum())
    zeros = labels.size - ones
    if ones == zeros:
        return 1.0  # exact tie resolves to the positive class
    return 1.0 if ones > zeros else 0.0


def _build_tree(features, labels, rng: np.random.Generator, n_candidates: int, builder):
    # explicit stack (deep trees overflow recursion); popping left children
    # first keeps rng draws in preorder, so results match a recursive build
    stack = [(np.arange(labels.size), -1, True)]
    while stack:
        row_idx, parent, is_left = stack.pop()
        y = labels[row_idx]
        total = y.size
        ones = int(y.sum())
        best = None
        if 0 < ones < total and total >= 2:
            candidates = rng.choice(features.shape[1], size=n_candidates, replace=False)
            for f in candidates:
                found = _best_gini_split(features[row_idx, f], y)
                if found is None:
                    continue
                weighted, threshold = found
                if best is None or weighted < best[0]:
                    best = (weighted, int(f), threshold)
        if best is None:
            node = builder.add_leaf(_majority(y))
        else:
            _, f, threshold = best
            node = builder.add_split(f, threshold)
            mask = features[row_idx, f] <= threshold
            stack.append((row_idx[~mask], node, False))
            stack.append((row_idx[mask], node, True))
        if parent >= 0:
            if is_left:
                builder.left[parent] = node
            else:
                builder.right[parent] = node


@dataclass
class ForestModel:
    trees: list
    n_features: int
    meta: TrainMeta = field(default=None)

    def predict(self, features: np.ndarray) -> np.ndarray:
        features = check_predict_input(features, self.n_features)
        if features.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        votes = np.zeros(features.shape[0])
        for tree in self.trees:
            votes += tree.predict_value(features)
        # vote ties resolve to the positive class
        return (2 * votes >= len(self.trees)).astype(np.int64)


def train_random_forest(
    features: np.ndarray,
    labels: np.ndarray,
    n_estimators: int = 100,
    seed: int = 0,
) -> ForestModel:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, d = features.shape
    n_candidates = max(1, math.ceil(math.sqrt(d)))
    rng = np.random.default_rng(seed)

    trees = []
    for _ in range(n_estimators):
        bootstrap = rng.integers(0, n, size=n)
        builder = _TreeBuilder()
        _build_tree(features[bootstrap], labels[bootstrap], rng, n_candidates, builder)
        trees.append(builder.finish())
    meta = TrainMeta(kind="rf")
    return ForestModel(trees=trees, n_features=d, meta=meta)
