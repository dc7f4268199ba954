"""Random forest: Gini arithmetic, split optimality, bagging behavior."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.exceptions import NotFittedError

from phishscreen import GiniRandomForest, TreeNodes, gini_impurity
from phishscreen.forest import _n_candidates


def _count_matrix(n, seed, informative=True):
    """Integer count matrix resembling bag-of-words features."""
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n)
    X = rng.poisson(1.0, size=(n, 8))
    if informative:
        X[:, 0] += y * rng.poisson(4.0, size=n)
        X[:, 1] += (1 - y) * rng.poisson(4.0, size=n)
    return X.astype(np.float64), y


def _brute_force_best_weighted_gini(X, y, min_leaf=1):
    """Exhaustive scan of every feature and every midpoint threshold."""
    n = len(y)
    total1 = int(y.sum())
    best = gini_impurity(n - total1, total1)
    for f in range(X.shape[1]):
        for thr in _midpoints(X[:, f]):
            mask = X[:, f] <= thr
            nl, nr = int(mask.sum()), int((~mask).sum())
            if nl < min_leaf or nr < min_leaf:
                continue
            l1, r1 = int(y[mask].sum()), int(y[~mask].sum())
            w = (nl * gini_impurity(nl - l1, l1) + nr * gini_impurity(nr - r1, r1)) / n
            best = min(best, w)
    return best


def _midpoints(col):
    vals = np.unique(col)
    return (vals[:-1] + vals[1:]) / 2.0


def _node_weighted_child_gini(tree, node):
    cl = tree.counts[tree.left[node]]
    cr = tree.counts[tree.right[node]]
    n = cl.sum() + cr.sum()
    return (
        cl.sum() * gini_impurity(int(cl[0]), int(cl[1]))
        + cr.sum() * gini_impurity(int(cr[0]), int(cr[1]))
    ) / n


class TestGiniImpurity:
    def test_pure_nodes(self):
        assert gini_impurity(5, 0) == 0.0
        assert gini_impurity(0, 9) == 0.0

    def test_balanced_node(self):
        assert gini_impurity(10, 10) == pytest.approx(0.5)

    def test_empty_node(self):
        assert gini_impurity(0, 0) == 0.0

    @given(st.integers(0, 500), st.integers(0, 500))
    def test_matches_closed_form_and_range(self, a, b):
        g = gini_impurity(a, b)
        assert 0.0 <= g <= 0.5
        if a + b:
            p = b / (a + b)
            assert g == pytest.approx(2 * p * (1 - p))


class TestLeafProbability:
    def test_worked_example_three_phish_one_legit(self):
        tree = TreeNodes(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            counts=np.array([[1, 3]]),
        )
        assert tree.leaf_probability()[0] == pytest.approx(0.75)

    def test_empty_node_probability_zero(self):
        tree = TreeNodes(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            counts=np.array([[0, 0]]),
        )
        assert tree.leaf_probability()[0] == 0.0


class TestFeatureRule:
    def test_sqrt(self):
        assert _n_candidates("sqrt", 100) == 10
        assert _n_candidates("sqrt", 2) == 1

    def test_log2(self):
        assert _n_candidates("log2", 64) == 6
        assert _n_candidates("log2", 1) == 1

    def test_all(self):
        assert _n_candidates("all", 17) == 17

    def test_explicit_int_clamped(self):
        assert _n_candidates(5, 3) == 3
        assert _n_candidates(5, 20) == 5

    def test_unknown_rule_raises(self):
        with pytest.raises(ValueError):
            _n_candidates("cube", 10)


class TestFitValidation:
    def test_single_class_rejected(self):
        X = np.ones((4, 2))
        with pytest.raises(ValueError):
            GiniRandomForest(n_trees=2).fit(X, [1, 1, 1, 1])

    def test_zero_samples_rejected(self):
        with pytest.raises(ValueError):
            GiniRandomForest().fit(np.zeros((0, 3)), [])

    def test_bad_hyperparameters_rejected(self):
        X, y = _count_matrix(20, seed=0)
        with pytest.raises(ValueError):
            GiniRandomForest(n_trees=0).fit(X, y)
        with pytest.raises(ValueError):
            GiniRandomForest(min_leaf=0).fit(X, y)

    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            GiniRandomForest().predict(np.zeros((1, 2)))

    def test_feature_count_enforced_at_predict(self):
        X, y = _count_matrix(30, seed=1)
        forest = GiniRandomForest(n_trees=3, seed=0).fit(X, y)
        with pytest.raises(ValueError):
            forest.predict(np.zeros((2, X.shape[1] + 1)))


class TestRootSplitOptimality:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_root_split_matches_exhaustive_oracle(self, seed):
        """With all features in play, the root split must reach the
        brute-force minimum weighted Gini over the tree's bootstrap."""
        X, y = _count_matrix(40, seed=seed)
        forest = GiniRandomForest(n_trees=1, feature_rule="all", seed=seed).fit(X, y)
        tree = forest.trees_[0]

        # reconstruct the bootstrap the tree trained on
        boot_rng = np.random.default_rng([seed, 0])
        idx = boot_rng.integers(0, X.shape[0], size=X.shape[0])
        Xb = X[idx].astype(np.float32)
        yb = y[idx]

        n1 = int(yb.sum())
        np.testing.assert_array_equal(tree.counts[0], [len(yb) - n1, n1])

        want = _brute_force_best_weighted_gini(Xb, yb)
        if tree.feature[0] == -1:
            # no improving split existed
            assert want >= gini_impurity(len(yb) - n1, n1) - 1e-12
        else:
            got = _node_weighted_child_gini(tree, 0)
            assert got == pytest.approx(want, abs=1e-12)


class TestSplitMonotonicity:
    def test_every_split_does_not_increase_gini(self):
        X, y = _count_matrix(60, seed=3)
        forest = GiniRandomForest(n_trees=10, seed=7).fit(X, y)
        checked = 0
        for tree in forest.trees_:
            for node in range(tree.n_nodes):
                if tree.feature[node] == -1:
                    continue
                parent = gini_impurity(int(tree.counts[node][0]), int(tree.counts[node][1]))
                child = _node_weighted_child_gini(tree, node)
                assert child <= parent + 1e-12
                checked += 1
        assert checked > 0

    def test_children_counts_sum_to_parent(self):
        X, y = _count_matrix(50, seed=4)
        forest = GiniRandomForest(n_trees=5, seed=2).fit(X, y)
        for tree in forest.trees_:
            for node in range(tree.n_nodes):
                if tree.feature[node] == -1:
                    continue
                np.testing.assert_array_equal(
                    tree.counts[node],
                    tree.counts[tree.left[node]] + tree.counts[tree.right[node]],
                )

    def test_min_leaf_respected(self):
        X, y = _count_matrix(80, seed=5)
        forest = GiniRandomForest(n_trees=5, min_leaf=4, seed=1).fit(X, y)
        for tree in forest.trees_:
            for node in range(tree.n_nodes):
                if tree.feature[node] == -1 and node != 0:
                    assert tree.counts[node].sum() >= 4

    def test_max_depth_one_gives_stumps(self):
        X, y = _count_matrix(60, seed=6)
        forest = GiniRandomForest(n_trees=8, max_depth=1, seed=0).fit(X, y)
        for tree in forest.trees_:
            assert tree.n_nodes <= 3


def _separable_fixture(n=20, seed=0):
    """Counts where feature 0 is positive exactly for phishing rows."""
    rng = np.random.default_rng(seed)
    y = np.array([1, 0] * (n // 2))
    X = rng.poisson(1.0, size=(n, 4)).astype(np.float64)
    X[:, 0] = np.where(y == 1, 1 + rng.poisson(2.0, size=n), 0)
    return X, y


class TestSeparableFixture:
    def test_training_accuracy_one(self):
        X, y = _separable_fixture(20, seed=0)
        forest = GiniRandomForest(n_trees=100, seed=0).fit(X, y)
        assert float((forest.predict(X) == y).mean()) == 1.0

    def test_stump_root_splits_on_the_separating_feature(self):
        """One depth-1 tree with all features in play: the exhaustive
        Gini scan must choose feature 0, whose split is pure."""
        X, y = _separable_fixture(20, seed=1)
        forest = GiniRandomForest(
            n_trees=1, max_depth=1, feature_rule="all", seed=3
        ).fit(X, y)
        tree = forest.trees_[0]
        assert tree.feature[0] == 0
        assert _node_weighted_child_gini(tree, 0) == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < tree.threshold[0] < 1.0


class TestForestAveraging:
    def test_duplicated_identical_tree_leaves_probability_unchanged(self):
        X, y = _count_matrix(40, seed=20)
        forest = GiniRandomForest(n_trees=1, seed=2).fit(X, y)
        single = forest.phishing_probability(X)
        forest.trees_ = [forest.trees_[0], forest.trees_[0]]
        np.testing.assert_allclose(forest.phishing_probability(X), single, atol=1e-15)

    def test_probability_is_mean_of_tree_probabilities(self):
        """Ten-tree forest output equals the hand-computed tree mean."""
        X, y = _count_matrix(50, seed=8)
        forest = GiniRandomForest(n_trees=10, seed=3).fit(X, y)
        Xq = X[:17].astype(np.float32)
        manual = np.mean([forest._tree_proba(t, Xq) for t in forest.trees_], axis=0)
        np.testing.assert_allclose(forest.phishing_probability(X[:17]), manual, atol=1e-12)

    def test_predict_proba_columns_sum_to_one(self):
        X, y = _count_matrix(40, seed=9)
        forest = GiniRandomForest(n_trees=5, seed=0).fit(X, y)
        proba = forest.predict_proba(X)
        np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-12)
        assert proba.shape == (40, 2)

    def test_predict_thresholds_at_half(self):
        X, y = _count_matrix(40, seed=10)
        forest = GiniRandomForest(n_trees=5, seed=0).fit(X, y)
        p = forest.phishing_probability(X)
        np.testing.assert_array_equal(forest.predict(X), (p >= 0.5).astype(int))

    def test_empty_batch(self):
        X, y = _count_matrix(30, seed=11)
        forest = GiniRandomForest(n_trees=3, seed=0).fit(X, y)
        assert forest.phishing_probability(np.zeros((0, X.shape[1]))).shape == (0,)


class TestDeterminismAndAccuracy:
    def test_same_seed_same_trees(self):
        X, y = _count_matrix(50, seed=12)
        a = GiniRandomForest(n_trees=4, seed=5).fit(X, y)
        b = GiniRandomForest(n_trees=4, seed=5).fit(X, y)
        for ta, tb in zip(a.trees_, b.trees_):
            np.testing.assert_array_equal(ta.feature, tb.feature)
            np.testing.assert_array_equal(ta.threshold, tb.threshold)
            np.testing.assert_array_equal(ta.counts, tb.counts)

    def test_different_seeds_differ(self):
        X, y = _count_matrix(50, seed=12)
        a = GiniRandomForest(n_trees=4, seed=5).fit(X, y)
        b = GiniRandomForest(n_trees=4, seed=6).fit(X, y)
        different = any(
            ta.n_nodes != tb.n_nodes or not np.array_equal(ta.feature, tb.feature)
            for ta, tb in zip(a.trees_, b.trees_)
        )
        assert different

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_separable_data_accuracy_at_least_95_percent(self, seed):
        """Five seeds on cleanly separable counts: held-out accuracy >= 0.95."""
        rng = np.random.default_rng([seed, 99])
        n = 200
        y = rng.integers(0, 2, size=n)
        X = rng.poisson(1.0, size=(n, 6)).astype(np.float64)
        X[:, 0] = y * 5 + rng.poisson(0.5, size=n)
        X_train, y_train = X[:150], y[:150]
        X_test, y_test = X[150:], y[150:]
        forest = GiniRandomForest(n_trees=20, seed=seed).fit(X_train, y_train)
        acc = float((forest.predict(X_test) == y_test).mean())
        assert acc >= 0.95
