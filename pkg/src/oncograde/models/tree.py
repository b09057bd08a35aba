"""CART classifier with Gini impurity and a minimum-child-weight split
constraint.

Candidate thresholds are midpoints between consecutive distinct sorted
values per feature. The best split maximizes the weighted impurity
decrease; ties go to the lower feature index, then the lower threshold.
Zero-gain splits are admitted (an XOR pattern is only separable through
one), so impurity is non-increasing rather than strictly decreasing.
A split is admissible only if both children carry total weight of at
least ``min_child_weight``; growth stops on purity, depth, or when no
admissible split exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import as_matrix
from ..dataset import N_CLASSES
from .base import proba_to_labels


@dataclass
class TreeModel:
    family = "tree"
    nodes: list[dict]
    n_features: int

    def predict_proba(self, X) -> np.ndarray:
        X = as_matrix(X)
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"dimension mismatch: model expects {self.n_features} features, got {X.shape[1]}"
            )
        out = np.empty((X.shape[0], N_CLASSES), dtype=float)
        for r in range(X.shape[0]):
            node = self.nodes[0]
            while "leaf" not in node:
                if X[r, node["feature"]] <= node["threshold"]:
                    node = self.nodes[node["left"]]
                else:
                    node = self.nodes[node["right"]]
            hist = np.asarray(node["hist"], dtype=float)
            out[r] = hist / hist.sum()
        return out

    def predict(self, X) -> np.ndarray:
        return proba_to_labels(self.predict_proba(X))

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def to_params(self) -> dict:
        return {"n_features": self.n_features, "nodes": self.nodes}

    @classmethod
    def from_params(cls, params: dict) -> "TreeModel":
        return cls(nodes=params["nodes"], n_features=params["n_features"])


def _weighted_hist(y, w) -> np.ndarray:
    return np.asarray(
        [w[y == c].sum() for c in range(N_CLASSES)], dtype=float
    )


def _gini(hist: np.ndarray, total: float) -> float:
    return 1.0 - float(((hist / total) ** 2).sum())


def _best_split(X, y, w, min_child_weight):
    """Return (gain, feature, threshold) or None if nothing admissible."""
    n, m = X.shape
    total_w = float(w.sum())
    parent_hist = _weighted_hist(y, w)
    parent_gini = _gini(parent_hist, total_w)

    best = None
    for feat in range(m):
        order = np.argsort(X[:, feat], kind="stable")
        xs = X[order, feat]
        boundaries = np.where(xs[:-1] != xs[1:])[0]
        if boundaries.size == 0:
            continue
        wc = np.zeros((n, N_CLASSES))
        wc[np.arange(n), y[order]] = w[order]
        cum = np.cumsum(wc, axis=0)

        left_hist = cum[boundaries]
        left_w = left_hist.sum(axis=1)
        right_hist = parent_hist - left_hist
        right_w = total_w - left_w
        admissible = (left_w >= min_child_weight) & (right_w >= min_child_weight)
        if not admissible.any():
            continue

        gini_left = 1.0 - ((left_hist / left_w[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_hist / right_w[:, None]) ** 2).sum(axis=1)
        gains = parent_gini - (left_w * gini_left + right_w * gini_right) / total_w
        gains[~admissible] = -np.inf

        pos = int(np.argmax(gains))  # first max -> lowest threshold
        gain = float(gains[pos])
        if best is None or gain > best[0]:
            b = boundaries[pos]
            threshold = (xs[b] + xs[b + 1]) / 2.0
            best = (gain, feat, float(threshold))
    return best


def train_tree(X, y, sample_weights=None, max_depth: int = 8, min_child_weight: float = 1.0) -> TreeModel:
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot train a tree on empty input")
    if sample_weights is None:
        w = np.ones(X.shape[0], dtype=float)
    else:
        w = np.asarray(sample_weights, dtype=float)
        if (w <= 0).any():
            raise ValueError("sample weights must be positive")

    nodes: list[dict] = []

    def build(rows: np.ndarray, depth: int) -> int:
        idx = len(nodes)
        nodes.append({})
        ys, ws = y[rows], w[rows]
        pure = np.unique(ys).size == 1
        split = None
        if not pure and depth < max_depth:
            split = _best_split(X[rows], ys, ws, min_child_weight)
        if split is None:
            nodes[idx] = {"leaf": True, "hist": _weighted_hist(ys, ws).tolist()}
            return idx
        _, feat, thr = split
        mask = X[rows, feat] <= thr
        left = build(rows[mask], depth + 1)
        right = build(rows[~mask], depth + 1)
        nodes[idx] = {"feature": int(feat), "threshold": thr, "left": left, "right": right}
        return idx

    build(np.arange(X.shape[0]), 0)
    return TreeModel(nodes=nodes, n_features=X.shape[1])
