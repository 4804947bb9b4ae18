"""Bootstrap-aggregated CART regression trees (the embeddings-plus-forest baseline).

Splits minimize the summed squared error of the two children, searched over
midpoints of consecutive distinct values on a per-node random feature subset.
Everything is seeded, so the same seed grows the same forest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0


@dataclass
class RandomForest:
    trees: list[TreeNode]
    n_features: int


def _best_split(x: np.ndarray, y: np.ndarray, features: np.ndarray):
    """(feature, threshold) minimizing child SSE, or None if nothing separates."""
    n = len(y)
    best = None
    best_sse = np.inf
    for f in features:
        order = np.argsort(x[:, f], kind="mergesort")
        xs, ys = x[order, f], y[order]
        cum = np.cumsum(ys)
        cum_sq = np.cumsum(ys**2)
        total, total_sq = cum[-1], cum_sq[-1]
        # candidate split after position i (left = first i+1 rows)
        boundaries = np.nonzero(xs[1:] != xs[:-1])[0]
        if len(boundaries) == 0:
            continue
        left_n = boundaries + 1.0
        right_n = n - left_n
        left_sse = cum_sq[boundaries] - cum[boundaries] ** 2 / left_n
        right_sum = total - cum[boundaries]
        right_sse = (total_sq - cum_sq[boundaries]) - right_sum**2 / right_n
        sse = left_sse + right_sse
        i = int(np.argmin(sse))
        if sse[i] < best_sse - 1e-12:
            best_sse = sse[i]
            b = boundaries[i]
            best = (int(f), float((xs[b] + xs[b + 1]) / 2.0))
    return best


def _grow(x: np.ndarray, y: np.ndarray, rng: np.random.Generator, n_subset: int,
          min_samples_split: int) -> TreeNode:
    if len(y) < min_samples_split or np.all(y == y[0]):
        return TreeNode(value=float(y.mean()))
    features = rng.choice(x.shape[1], size=n_subset, replace=False)
    split = _best_split(x, y, features)
    if split is None:
        return TreeNode(value=float(y.mean()))
    feature, threshold = split
    go_left = x[:, feature] <= threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        left=_grow(x[go_left], y[go_left], rng, n_subset, min_samples_split),
        right=_grow(x[~go_left], y[~go_left], rng, n_subset, min_samples_split),
        value=float(y.mean()),
    )


def rf_fit(
    inputs,
    labels,
    n_trees: int = 100,
    max_features_fraction: float = 1.0 / 3.0,
    seed: int = 0,
    min_samples_split: int = 2,
) -> RandomForest:
    x = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != len(y):
        raise ValueError(f"inputs {x.shape} do not match {len(y)} labels")
    if len(y) == 0:
        raise ValueError("cannot fit a forest on zero samples")
    n_subset = max(1, int(round(max_features_fraction * x.shape[1])))
    n_subset = min(n_subset, x.shape[1])
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        boot = rng.integers(0, len(y), size=len(y))
        trees.append(_grow(x[boot], y[boot], rng, n_subset, min_samples_split))
    return RandomForest(trees=trees, n_features=x.shape[1])


def _eval_tree(node: TreeNode, x: np.ndarray, out: np.ndarray, rows: np.ndarray) -> None:
    if node.feature < 0:
        out[rows] = node.value
        return
    go_left = x[rows, node.feature] <= node.threshold
    _eval_tree(node.left, x, out, rows[go_left])
    _eval_tree(node.right, x, out, rows[~go_left])


def rf_predict(forest: RandomForest, inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != forest.n_features:
        raise ValueError(f"inputs must be (n, {forest.n_features}), got {x.shape}")
    total = np.zeros(x.shape[0], dtype=np.float64)
    scratch = np.empty(x.shape[0], dtype=np.float64)
    all_rows = np.arange(x.shape[0])
    for tree in forest.trees:
        _eval_tree(tree, x, scratch, all_rows)
        total += scratch
    return total / len(forest.trees)
