"""Centroid-guided key-token extraction for HTML token streams.

The idea: embed every vocabulary token, average the occurrences seen in
each class's training streams into one centroid per class, then keep
for every document the ``m`` token occurrences whose vectors lie
closest (by cosine) to either centroid. The kept occurrences are
counted into a bag-of-words over a ranked vocabulary, which is what the
downstream classifier consumes. Documents are never cropped by
position; selection is content-based, which is what makes the feature
space robust to junk prepended to a page.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone
from sklearn.exceptions import NotFittedError

from .corpus import Label
from .embeddings import SkipGramEmbedder
from .errors import DataError
from .html_tokenizer import TokenStream
from .validation import check_labels

DEFAULT_SELECT_M = 2000
DEFAULT_VOCAB_CAP = 20000


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors; 0.0 when either has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class ClassCentroids:
    """One centroid per class in embedding space."""

    phishing: np.ndarray
    legitimate: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.legitimate, self.phishing])


def _weighted_mean(vectors: np.ndarray, weights=None) -> np.ndarray:
    vectors = np.asarray(vectors)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise DataError("centroid requires a non-empty 2-D stack of vectors")
    acc = vectors.astype(np.float64, copy=False)
    if weights is None:
        return acc.mean(axis=0)
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        raise DataError("centroid weights must have a positive sum")
    return (acc * weights[:, None]).sum(axis=0) / total


def compute_centroids(
    phishing_vectors,
    legitimate_vectors,
    phishing_weights=None,
    legitimate_weights=None,
) -> ClassCentroids:
    """Arithmetic mean of each class's vectors, optionally multiplicity-weighted.

    Passing occurrence counts as weights is exactly equivalent to
    repeating each vector that many times and taking the plain mean.
    Raises DataError when either class has no vectors.
    """
    return ClassCentroids(
        phishing=_weighted_mean(phishing_vectors, phishing_weights),
        legitimate=_weighted_mean(legitimate_vectors, legitimate_weights),
    )


def _kmeans_centers(vectors, weights, k, rng, iters=25) -> np.ndarray:
    """Weighted Lloyd iteration; returns the k cluster centers."""
    vectors = np.asarray(vectors, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    n = vectors.shape[0]
    k = min(k, n)
    centers = vectors[rng.choice(n, size=k, replace=False)]
    for _ in range(iters):
        d2 = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        new_centers = centers.copy()
        for j in range(k):
            mask = assign == j
            if mask.any():
                new_centers[j] = _weighted_mean(vectors[mask], weights[mask])
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
    return centers


@dataclass
class SelectionResult:
    """Token occurrences kept for one document, best scores first."""

    sample_id: str = ""
    tokens: list[str] = field(default_factory=list)
    positions: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    scores: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.tokens)


def select_key_tokens(
    stream,
    embedder: SkipGramEmbedder,
    centroids: ClassCentroids,
    m: int = DEFAULT_SELECT_M,
) -> SelectionResult:
    """Keep the m occurrences scoring highest against either centroid.

    Every in-vocabulary occurrence is scored with the larger of its
    cosine similarities to the two class centroids. Out-of-vocabulary
    tokens are skipped. Ties are broken toward the earlier document
    position. Streams with fewer than m in-vocabulary occurrences are
    returned whole, without padding.
    """
    if m <= 0:
        raise ValueError("m must be positive")
    if isinstance(stream, TokenStream):
        sample_id, tokens = stream.sample_id, stream.tokens
    else:
        sample_id, tokens = "", list(stream)

    score_of: dict[str, float] = {}
    kept_tokens: list[str] = []
    kept_pos: list[int] = []
    kept_scores: list[float] = []
    for pos, tok in enumerate(tokens):
        s = score_of.get(tok)
        if s is None:
            vec = embedder.vector(tok)
            if vec is None:
                score_of[tok] = float("nan")
                continue
            s = max(
                cosine_similarity(vec, centroids.phishing),
                cosine_similarity(vec, centroids.legitimate),
            )
            score_of[tok] = s
        elif s != s:  # cached OOV marker
            continue
        kept_tokens.append(tok)
        kept_pos.append(pos)
        kept_scores.append(s)

    positions = np.asarray(kept_pos, dtype=np.int64)
    scores = np.asarray(kept_scores, dtype=np.float64)
    order = np.lexsort((positions, -scores))[:m]
    return SelectionResult(
        sample_id=sample_id,
        tokens=[kept_tokens[i] for i in order],
        positions=positions[order],
        scores=scores[order],
    )


@dataclass(frozen=True)
class Vocabulary:
    """Ranked token list with a reverse index."""

    tokens: tuple[str, ...]
    index: dict[str, int] = field(repr=False, default_factory=dict)

    @classmethod
    def from_ranked(cls, tokens) -> "Vocabulary":
        tokens = tuple(tokens)
        return cls(tokens=tokens, index={t: i for i, t in enumerate(tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index


def _ranked_vocabulary(counts: dict[str, int], cap: int) -> Vocabulary:
    if not counts:
        raise DataError("cannot build a vocabulary from zero selected tokens")
    if cap <= 0:
        raise ValueError("vocabulary cap must be positive")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary.from_ranked(tok for tok, _ in ranked[:cap])


def build_vocabulary(selections, cap: int = DEFAULT_VOCAB_CAP) -> Vocabulary:
    """Rank distinct selected tokens by total selected-occurrence count.

    Ties are broken lexicographically; the list is truncated to ``cap``.
    Raises DataError when no tokens were selected at all.
    """
    counts: dict[str, int] = {}
    for sel in selections:
        for tok in sel.tokens:
            counts[tok] = counts.get(tok, 0) + 1
    return _ranked_vocabulary(counts, cap)


def to_bow(selection, vocabulary: Vocabulary) -> np.ndarray:
    """Count selected occurrences into a vector aligned with the vocabulary.

    Selected tokens that fell outside the (capped) vocabulary contribute
    nothing, so the vector total is len(selection) minus those misses.
    """
    tokens = selection.tokens if isinstance(selection, SelectionResult) else selection
    counts = np.zeros(len(vocabulary), dtype=np.int64)
    idx = [vocabulary.index[t] for t in tokens if t in vocabulary.index]
    if idx:
        counts += np.bincount(np.asarray(idx), minlength=len(vocabulary))
    return counts


def write_vocabulary(vocabulary: Vocabulary, path) -> None:
    """One token per line, rank order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tok in vocabulary.tokens:
            fh.write(tok + "\n")


def write_bow_triplets(sample_ids, matrix, path) -> None:
    """Sparse text export: one ``sample_id,vocab_index,count`` row per nonzero."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sample_id,vocab_index,count\n")
        for sid, row in zip(sample_ids, matrix):
            for j in np.flatnonzero(row):
                fh.write(f"{sid},{j},{row[j]}\n")


class KeyTokenExtractor(BaseEstimator, TransformerMixin):
    """Transformer from token streams to key-token bag-of-words vectors.

    Fitting trains the embedder on the given streams, averages each
    class's token occurrences into a centroid, selects the key
    occurrences of every training stream and freezes the ranked
    vocabulary. ``transform`` then maps any stream to integer counts.

    Args:
        embedder: unfitted SkipGramEmbedder to clone; None for defaults.
        select_m: occurrences kept per document.
        vocab_cap: maximum vocabulary length.
        kmeans_clusters: optional refinement; when set, each class
            centroid is the mean of this many k-means cluster centers
            fitted to the class's occurrence-weighted vectors. Off by
            default: the plain per-class mean is the reference behavior.
        kmeans_iters: Lloyd iterations for the refinement.
        seed: RNG seed for the k-means init (unused otherwise).
    """

    def __init__(
        self,
        embedder: SkipGramEmbedder | None = None,
        select_m: int = DEFAULT_SELECT_M,
        vocab_cap: int = DEFAULT_VOCAB_CAP,
        kmeans_clusters: int | None = None,
        kmeans_iters: int = 25,
        seed: int = 0,
    ):
        self.embedder = embedder
        self.select_m = select_m
        self.vocab_cap = vocab_cap
        self.kmeans_clusters = kmeans_clusters
        self.kmeans_iters = kmeans_iters
        self.seed = seed

    def _class_centroid(self, token_counts: dict[str, int], rng) -> np.ndarray:
        if not token_counts:
            raise DataError("a class has no in-vocabulary token occurrences")
        tokens = sorted(token_counts)
        vectors = np.stack([self.embedder_.vector(t) for t in tokens])
        weights = np.array([token_counts[t] for t in tokens], dtype=np.float64)
        if self.kmeans_clusters:
            centers = _kmeans_centers(
                vectors, weights, self.kmeans_clusters, rng, self.kmeans_iters
            )
            return centers.mean(axis=0)
        return _weighted_mean(vectors, weights)

    def fit(self, X, y):
        self.fit_transform(X, y)
        return self

    def fit_transform(self, X, y):
        streams = list(X)
        labels = check_labels(y, len(streams))
        base = self.embedder if self.embedder is not None else SkipGramEmbedder()
        self.embedder_ = clone(base).fit(streams)

        per_class: dict[int, dict[str, int]] = {0: {}, 1: {}}
        for stream, label in zip(streams, labels):
            counts = per_class[int(label)]
            for tok in _as_tokens(stream):
                if tok in self.embedder_.vocab_:
                    counts[tok] = counts.get(tok, 0) + 1
        rng = np.random.default_rng(self.seed)
        phish = self._class_centroid(per_class[int(Label.PHISHING)], rng)
        legit = self._class_centroid(per_class[int(Label.LEGITIMATE)], rng)
        self.centroids_ = ClassCentroids(
            phishing=phish.astype(np.float32),
            legitimate=legit.astype(np.float32),
        )

        selections = [self._select(s) for s in streams]
        self.vocabulary_ = build_vocabulary(selections, self.vocab_cap)
        self.n_features_in_ = 0
        return np.stack([to_bow(sel, self.vocabulary_) for sel in selections])

    def _select(self, stream) -> SelectionResult:
        return select_key_tokens(stream, self.embedder_, self.centroids_, self.select_m)

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        streams = list(X)
        if not streams:
            return np.zeros((0, len(self.vocabulary_)), dtype=np.int64)
        return np.stack([to_bow(self._select(s), self.vocabulary_) for s in streams])

    def select(self, stream) -> SelectionResult:
        """Expose the per-document selection of the fitted model."""
        self._check_fitted()
        return self._select(stream)

    def get_feature_names_out(self, input_features=None):
        self._check_fitted()
        return np.asarray(self.vocabulary_.tokens, dtype=object)

    def _check_fitted(self):
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("KeyTokenExtractor is not fitted yet")


def _as_tokens(stream) -> list[str]:
    if isinstance(stream, TokenStream):
        return stream.tokens
    return list(stream)
