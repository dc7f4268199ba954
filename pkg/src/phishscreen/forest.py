"""Random forest over bag-of-words counts, built from first principles.

Trees are stored as flat node tables (feature index, threshold, child
links, class-count pair) so they serialize directly into the model
bundle and every split decision is inspectable by tests. Splits
minimize weighted Gini impurity over a per-node random feature subset;
each tree trains on its own bootstrap resample. Tree construction is
independent per tree (parallel-friendly), executed sequentially here so
a fixed seed always reproduces the same model.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .validation import check_labels, check_matrix

FEATURE_RULES = ("sqrt", "log2", "all")


@dataclass
class TreeNodes:
    """One decision tree as parallel arrays indexed by node id.

    Leaves carry ``feature == -1`` and ``left == right == -1``. Every
    node, internal or leaf, keeps its training class counts
    ``(n_legitimate, n_phishing)``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def leaf_probability(self) -> np.ndarray:
        """Phishing fraction stored at each node."""
        totals = self.counts.sum(axis=1)
        return self.counts[:, 1] / np.maximum(totals, 1)


def gini_impurity(n_legit: int, n_phish: int) -> float:
    """Gini impurity of a two-class count pair."""
    n = n_legit + n_phish
    if n == 0:
        return 0.0
    p = n_phish / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _n_candidates(rule, n_features: int) -> int:
    if isinstance(rule, int):
        return max(1, min(rule, n_features))
    if rule == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if rule == "log2":
        return max(1, int(np.log2(n_features))) if n_features > 1 else 1
    if rule == "all":
        return n_features
    raise ValueError(f"unknown feature rule {rule!r}; expected one of {FEATURE_RULES} or an int")


class GiniRandomForest(BaseEstimator, ClassifierMixin):
    """Bootstrap-aggregated Gini decision trees for binary labels.

    Args:
        n_trees: ensemble size.
        max_depth: depth limit; None grows until purity or min_leaf.
        min_leaf: minimum samples on each side of any split.
        feature_rule: candidate features per split: "sqrt", "log2",
            "all", or an explicit integer.
        seed: controls bootstraps and feature subsets.
    """

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int | None = None,
        min_leaf: int = 1,
        feature_rule="sqrt",
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature_rule = feature_rule
        self.seed = seed

    def fit(self, X, y):
        X = check_matrix(X).astype(np.float32, copy=False)
        y = check_labels(y, X.shape[0])
        if X.shape[0] == 0:
            raise ValueError("cannot fit a forest on zero samples")
        if np.unique(y).shape[0] < 2:
            raise ValueError("training data contains a single class; need both labels")
        if self.n_trees <= 0:
            raise ValueError("n_trees must be positive")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        mtry = _n_candidates(self.feature_rule, X.shape[1])
        self.trees_ = [
            self._build_tree(X, y, np.random.default_rng([self.seed, t]), mtry)
            for t in range(self.n_trees)
        ]
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1], dtype=np.int64)
        return self

    def _build_tree(self, X, y, rng, mtry) -> TreeNodes:
        n = X.shape[0]
        idx0 = rng.integers(0, n, size=n)
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        counts: list[tuple[int, int]] = []

        def new_node(idx) -> int:
            node_id = len(feature)
            n1 = int(y[idx].sum())
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            counts.append((idx.shape[0] - n1, n1))
            return node_id

        stack = [(new_node(idx0), idx0, 0)]
        while stack:
            node_id, idx, depth = stack.pop()
            n0, n1 = counts[node_id]
            if n0 == 0 or n1 == 0:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            if idx.shape[0] < 2 * self.min_leaf:
                continue
            split = self._best_split(X, y, idx, rng, mtry)
            if split is None:
                continue
            feat, thr, go_left = split
            feature[node_id] = feat
            threshold[node_id] = thr
            li = new_node(idx[go_left])
            ri = new_node(idx[~go_left])
            left[node_id] = li
            right[node_id] = ri
            stack.append((li, idx[go_left], depth + 1))
            stack.append((ri, idx[~go_left], depth + 1))

        return TreeNodes(
            feature=np.asarray(feature, dtype=np.int32),
            threshold=np.asarray(threshold, dtype=np.float32),
            left=np.asarray(left, dtype=np.int32),
            right=np.asarray(right, dtype=np.int32),
            counts=np.asarray(counts, dtype=np.int64),
        )

    def _best_split(self, X, y, idx, rng, mtry):
        """Exhaustive threshold scan over a random feature subset.

        Returns (feature, threshold, left_mask) for the split with the
        lowest weighted child Gini, or None when nothing improves on the
        parent impurity (splitting then stops, so the chosen split's
        weighted impurity is always <= the parent's).
        """
        n = idx.shape[0]
        ys = y[idx]
        total1 = int(ys.sum())
        parent = gini_impurity(n - total1, total1)
        candidates = rng.permutation(X.shape[1])[:mtry]

        best_score = parent
        best_feat = -1
        best_thr = 0.0
        for feat in candidates:
            col = X[idx, feat]
            order = np.argsort(col, kind="stable")
            cs = col[order]
            cum1 = np.cumsum(ys[order])
            cuts = np.flatnonzero(cs[1:] != cs[:-1])
            if cuts.size == 0:
                continue
            n_left = cuts + 1
            n_right = n - n_left
            valid = (n_left >= self.min_leaf) & (n_right >= self.min_leaf)
            if not valid.any():
                continue
            pos_left = cum1[cuts]
            pos_right = total1 - pos_left
            p_l = pos_left / n_left
            p_r = pos_right / n_right
            gini_l = 1.0 - p_l * p_l - (1.0 - p_l) * (1.0 - p_l)
            gini_r = 1.0 - p_r * p_r - (1.0 - p_r) * (1.0 - p_r)
            weighted = (n_left * gini_l + n_right * gini_r) / n
            weighted[~valid] = np.inf
            j = int(np.argmin(weighted))
            if weighted[j] < best_score:
                best_score = float(weighted[j])
                best_feat = int(feat)
                best_thr = np.float32((float(cs[cuts[j]]) + float(cs[cuts[j] + 1])) / 2.0)
        if best_feat < 0:
            return None
        return best_feat, best_thr, X[idx, best_feat] <= best_thr

    def _tree_proba(self, tree: TreeNodes, X) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        rows = np.arange(X.shape[0])
        while True:
            feat = tree.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            sub = internal
            go_left = X[rows[sub], feat[sub]] <= tree.threshold[node[sub]]
            node[sub] = np.where(go_left, tree.left[node[sub]], tree.right[node[sub]])
        leaf_p = tree.leaf_probability()
        return leaf_p[node]

    def _check_fitted(self):
        if not hasattr(self, "trees_"):
            raise NotFittedError("GiniRandomForest is not fitted yet")

    def phishing_probability(self, X) -> np.ndarray:
        """Mean over trees of the reached leaf's phishing fraction."""
        self._check_fitted()
        X = check_matrix(X, self.n_features_in_).astype(np.float32, copy=False)
        if X.shape[0] == 0:
            return np.zeros(0, dtype=np.float64)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees_:
            acc += self._tree_proba(tree, X)
        return acc / len(self.trees_)

    def predict_proba(self, X) -> np.ndarray:
        p = self.phishing_probability(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.phishing_probability(X) >= 0.5).astype(np.int64)
