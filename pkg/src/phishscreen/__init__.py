"""Phishing webpage classifier.

Two branches scored per page and fused by soft voting:

* a character-level convolutional net over the URL, and
* a random forest over a bag of key HTML tokens, where "key" means
  closest (by cosine over skip-gram embeddings) to per-class centroid
  vectors learned from the training split.

All estimators follow the scikit-learn fit/transform/predict protocol
and are deterministic given their seeds.
"""

__version__ = "0.1.0"

from .bundle import load_model_bundle, save_model_bundle
from .corpus import Corpus, Label, Sample, load_corpus, save_corpus
from .embeddings import SkipGramEmbedder
from .ensemble import (
    VoteResult,
    VoteWeights,
    fit_weights,
    fuse_probabilities,
    soft_vote,
    weight_grid,
)
from .errors import BundleError, ConfigError, DataError, HarnessError, PhishScreenError
from .forest import GiniRandomForest, TreeNodes, gini_impurity
from .harness import attack_corpus, inject_attack, run_cv
from .html_tokenizer import TokenStream, tokenize
from .keytokens import (
    ClassCentroids,
    KeyTokenExtractor,
    SelectionResult,
    Vocabulary,
    build_vocabulary,
    compute_centroids,
    cosine_similarity,
    select_key_tokens,
    to_bow,
)
from .metrics import Metrics, MetricsReport, binary_metrics, confusion, metrics_from_confusion
from .pipeline import CroppedBowClassifier, HybridPhishClassifier, LabelOracleClassifier
from .splits import SplitPlan, make_cv_folds, make_splits, reduce_training
from .synthetic import make_donor_corpus, make_synthetic_corpus
from .urlnet import CharConvUrlClassifier, UrlEncoder, encode_url

__all__ = [
    "__version__",
    "BundleError",
    "CharConvUrlClassifier",
    "ClassCentroids",
    "ConfigError",
    "Corpus",
    "CroppedBowClassifier",
    "DataError",
    "GiniRandomForest",
    "HarnessError",
    "HybridPhishClassifier",
    "KeyTokenExtractor",
    "Label",
    "LabelOracleClassifier",
    "Metrics",
    "MetricsReport",
    "PhishScreenError",
    "Sample",
    "SelectionResult",
    "SkipGramEmbedder",
    "SplitPlan",
    "TokenStream",
    "TreeNodes",
    "UrlEncoder",
    "Vocabulary",
    "VoteResult",
    "VoteWeights",
    "attack_corpus",
    "binary_metrics",
    "build_vocabulary",
    "compute_centroids",
    "confusion",
    "cosine_similarity",
    "encode_url",
    "fit_weights",
    "fuse_probabilities",
    "gini_impurity",
    "inject_attack",
    "load_corpus",
    "load_model_bundle",
    "make_cv_folds",
    "make_donor_corpus",
    "make_splits",
    "make_synthetic_corpus",
    "metrics_from_confusion",
    "reduce_training",
    "run_cv",
    "save_corpus",
    "save_model_bundle",
    "select_key_tokens",
    "soft_vote",
    "tokenize",
    "to_bow",
    "weight_grid",
]
