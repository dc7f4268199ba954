"""End-to-end classifiers operating on corpus samples.

``HybridPhishClassifier`` is the full model: the key-token HTML branch
and the char-CNN URL branch, fused by soft voting with weights fitted
on validation data. ``CroppedBowClassifier`` is the positional
baseline used for robustness contrasts: it classifies on the first N
tokens of a page only. ``LabelOracleClassifier`` is a harness
diagnostic that reads the true label off each sample.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.exceptions import NotFittedError

from .corpus import Sample
from .ensemble import (
    DECISION_THRESHOLD,
    DEFAULT_GRID_STEP,
    VoteWeights,
    fit_weights,
    fuse_probabilities,
)
from .forest import GiniRandomForest
from .html_tokenizer import tokenize
from .keytokens import KeyTokenExtractor, _ranked_vocabulary, to_bow
from .metrics import binary_metrics
from .urlnet import CharConvUrlClassifier
from .validation import check_labels, check_samples


def _streams(samples: list[Sample]):
    return [tokenize(s.html, getattr(s, "id", "")) for s in samples]


def _stratified_val_split(y: np.ndarray, val_fraction: float, rng):
    """Index split keeping the class ratio in the carve-out."""
    val_idx: list[int] = []
    for cls in (0, 1):
        cls_idx = np.flatnonzero(y == cls)
        n_val = int(np.floor(val_fraction * cls_idx.shape[0]))
        perm = rng.permutation(cls_idx.shape[0])
        val_idx.extend(cls_idx[perm[:n_val]])
    mask = np.zeros(y.shape[0], dtype=bool)
    mask[val_idx] = True
    return np.flatnonzero(~mask), np.flatnonzero(mask)


class HybridPhishClassifier(BaseEstimator, ClassifierMixin):
    """URL branch + HTML branch, soft-voted.

    Args:
        extractor: unfitted KeyTokenExtractor (None for defaults).
        forest: unfitted GiniRandomForest for the HTML branch.
        urlnet: unfitted CharConvUrlClassifier for the URL branch.
        grid_step: weight grid resolution for the vote search.
        val_fraction: share of fit data carved out as validation when
            no explicit validation set is passed to ``fit``.
        seed: controls the internal validation carve-out only.
    """

    def __init__(
        self,
        extractor: KeyTokenExtractor | None = None,
        forest: GiniRandomForest | None = None,
        urlnet: CharConvUrlClassifier | None = None,
        grid_step: float = DEFAULT_GRID_STEP,
        val_fraction: float = 0.2,
        seed: int = 0,
    ):
        self.extractor = extractor
        self.forest = forest
        self.urlnet = urlnet
        self.grid_step = grid_step
        self.val_fraction = val_fraction
        self.seed = seed

    def fit(self, X, y, validation: tuple | None = None):
        """Train both branches and fit the vote weights.

        Args:
            X: sequence of Samples (training split).
            y: labels aligned with X.
            validation: optional (samples, labels) pair; when omitted, a
                stratified val_fraction share of X is held out.
        """
        samples = check_samples(X)
        labels = check_labels(y, len(samples))
        if validation is not None:
            train_s, y_train = samples, labels
            val_s = check_samples(validation[0])
            y_val = check_labels(validation[1], len(val_s))
        else:
            rng = np.random.default_rng([self.seed, 17])
            tr, va = _stratified_val_split(labels, self.val_fraction, rng)
            train_s = [samples[i] for i in tr]
            val_s = [samples[i] for i in va]
            y_train, y_val = labels[tr], labels[va]
        if len(val_s) == 0:
            raise ValueError("validation set is empty; cannot fit vote weights")

        extractor = self.extractor if self.extractor is not None else KeyTokenExtractor()
        forest = self.forest if self.forest is not None else GiniRandomForest()
        urlnet = self.urlnet if self.urlnet is not None else CharConvUrlClassifier()

        self.extractor_ = clone(extractor)
        bow_train = self.extractor_.fit_transform(_streams(train_s), y_train)
        self.forest_ = clone(forest).fit(bow_train, y_train)
        self.urlnet_ = clone(urlnet).fit([s.url for s in train_s], y_train)

        p_url = self.urlnet_.phishing_probability([s.url for s in val_s])
        p_html = self.forest_.phishing_probability(
            self.extractor_.transform(_streams(val_s))
        )
        self.weights_ = fit_weights(p_url, p_html, y_val, self.grid_step)
        fused = fuse_probabilities(p_url, p_html, self.weights_)
        self.validation_report_ = {
            "url_f1": binary_metrics(y_val, (p_url >= DECISION_THRESHOLD).astype(int)).f1,
            "html_f1": binary_metrics(y_val, (p_html >= DECISION_THRESHOLD).astype(int)).f1,
            "fused_f1": binary_metrics(y_val, (fused >= DECISION_THRESHOLD).astype(int)).f1,
            "w_url": self.weights_.w_url,
            "w_html": self.weights_.w_html,
        }
        self.classes_ = np.array([0, 1], dtype=np.int64)
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise NotFittedError("HybridPhishClassifier is not fitted yet")

    def branch_probabilities(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Per-branch phishing probabilities (p_url, p_html)."""
        self._check_fitted()
        samples = check_samples(X)
        p_url = self.urlnet_.phishing_probability([s.url for s in samples])
        p_html = self.forest_.phishing_probability(
            self.extractor_.transform(_streams(samples))
        )
        return p_url, p_html

    def phishing_probability(self, X) -> np.ndarray:
        p_url, p_html = self.branch_probabilities(X)
        return fuse_probabilities(p_url, p_html, self.weights_)

    def predict_proba(self, X) -> np.ndarray:
        p = self.phishing_probability(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.phishing_probability(X) >= DECISION_THRESHOLD).astype(np.int64)


class CroppedBowClassifier(BaseEstimator, ClassifierMixin):
    """Positional baseline: bag-of-words over the first N tokens only.

    No centroid selection and no URL branch; the vocabulary is ranked
    by frequency within the cropped training streams. Anything pushed
    beyond the crop window is invisible to this model, which is exactly
    the weakness the robustness experiments measure.
    """

    def __init__(
        self,
        crop_tokens: int = 2000,
        vocab_cap: int = 20000,
        forest: GiniRandomForest | None = None,
    ):
        self.crop_tokens = crop_tokens
        self.vocab_cap = vocab_cap
        self.forest = forest

    def _crops(self, samples):
        return [tokenize(s.html, s.id).tokens[: self.crop_tokens] for s in samples]

    def fit(self, X, y, validation: tuple | None = None):
        samples = check_samples(X)
        labels = check_labels(y, len(samples))
        if validation is not None:
            # the baseline has no vote weights; fold validation data into training
            val_s = check_samples(validation[0])
            samples = samples + val_s
            labels = np.concatenate([labels, check_labels(validation[1], len(val_s))])
        crops = self._crops(samples)
        counts: dict[str, int] = {}
        for crop in crops:
            for tok in crop:
                counts[tok] = counts.get(tok, 0) + 1
        self.vocabulary_ = _ranked_vocabulary(counts, self.vocab_cap)
        bow = np.stack([to_bow(c, self.vocabulary_) for c in crops])
        forest = self.forest if self.forest is not None else GiniRandomForest()
        self.forest_ = clone(forest).fit(bow, labels)
        self.classes_ = np.array([0, 1], dtype=np.int64)
        return self

    def _check_fitted(self):
        if not hasattr(self, "forest_"):
            raise NotFittedError("CroppedBowClassifier is not fitted yet")

    def phishing_probability(self, X) -> np.ndarray:
        self._check_fitted()
        crops = self._crops(check_samples(X))
        if not crops:
            return np.zeros(0, dtype=np.float64)
        bow = np.stack([to_bow(c, self.vocabulary_) for c in crops])
        return self.forest_.phishing_probability(bow)

    def predict_proba(self, X) -> np.ndarray:
        p = self.phishing_probability(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.phishing_probability(X) >= DECISION_THRESHOLD).astype(np.int64)


class LabelOracleClassifier(BaseEstimator, ClassifierMixin):
    """Diagnostic stub that predicts each sample's own label.

    Only useful for verifying harness plumbing: run through any
    protocol it must score a perfect 1.0 on every metric.
    """

    def fit(self, X, y, validation: tuple | None = None):
        check_samples(X)
        self.classes_ = np.array([0, 1], dtype=np.int64)
        self.fitted_ = True
        return self

    def phishing_probability(self, X) -> np.ndarray:
        if not hasattr(self, "fitted_"):
            raise NotFittedError("LabelOracleClassifier is not fitted yet")
        return np.array([float(int(s.label)) for s in check_samples(X)])

    def predict_proba(self, X) -> np.ndarray:
        p = self.phishing_probability(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.phishing_probability(X) >= DECISION_THRESHOLD).astype(np.int64)
