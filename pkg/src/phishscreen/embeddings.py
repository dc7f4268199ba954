"""Skip-gram word embeddings trained with negative sampling.

The trainer is written against numpy directly so that training is fully
reproducible: for a fixed seed it is deterministic (single-threaded by
construction) and two runs produce bit-identical matrices. Tokens that
fall under ``min_count`` are out of vocabulary and simply have no
vector; callers are expected to skip them.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import DataError
from .html_tokenizer import TokenStream

# Batch size trades throughput against update freshness: each row moves
# at most once per batch (see _step), so smaller batches mean more,
# smaller steps per epoch — closer to classic per-pair SGD.
_BATCH_PAIRS = 256


def _as_token_list(stream) -> list[str]:
    if isinstance(stream, TokenStream):
        return stream.tokens
    return list(stream)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class SkipGramEmbedder(BaseEstimator):
    """Learn one dense vector per vocabulary token from token streams.

    Args:
        dim: embedding width; every stored vector has this length.
        window: maximum one-sided context size; the effective window for
            each center token is drawn uniformly from 1..window.
        negatives: number of negative samples per (center, context) pair.
        epochs: full passes over the corpus.
        min_count: tokens with a lower corpus frequency get no vector.
        learning_rate: initial step size, decayed linearly to
            ``min_learning_rate`` over training.
        max_token_length: when set, tokens longer than this many
            characters are excluded from the vocabulary.
        seed: RNG seed controlling init, window draws and negatives.
    """

    def __init__(
        self,
        dim: int = 100,
        window: int = 5,
        negatives: int = 5,
        epochs: int = 5,
        min_count: int = 2,
        learning_rate: float = 0.025,
        min_learning_rate: float = 1e-4,
        max_token_length: int | None = None,
        seed: int = 0,
    ):
        self.dim = dim
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.min_count = min_count
        self.learning_rate = learning_rate
        self.min_learning_rate = min_learning_rate
        self.max_token_length = max_token_length
        self.seed = seed

    def fit(self, X, y=None):
        """Train on a sequence of token streams (TokenStream or lists)."""
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        sentences = [_as_token_list(s) for s in X]

        counts: dict[str, int] = {}
        for sent in sentences:
            for tok in sent:
                counts[tok] = counts.get(tok, 0) + 1
        kept = [
            (tok, c)
            for tok, c in counts.items()
            if c >= self.min_count
            and (self.max_token_length is None or len(tok) <= self.max_token_length)
        ]
        if not kept:
            raise DataError(
                "effective vocabulary is empty "
                f"(no token reached min_count={self.min_count})"
            )
        kept.sort(key=lambda item: (-item[1], item[0]))
        self.vocab_ = {tok: idx for idx, (tok, _) in enumerate(kept)}
        self.counts_ = np.array([c for _, c in kept], dtype=np.int64)
        vocab_size = len(kept)

        rng = np.random.default_rng(self.seed)
        w_in = ((rng.random((vocab_size, self.dim)) - 0.5) / self.dim).astype(np.float32)
        w_out = np.zeros((vocab_size, self.dim), dtype=np.float32)

        # encode sentences, dropping OOV tokens before windowing
        encoded = []
        for sent in sentences:
            ids = [self.vocab_[t] for t in sent if t in self.vocab_]
            if len(ids) >= 2:
                encoded.append(np.asarray(ids, dtype=np.int64))

        noise = self.counts_.astype(np.float64) ** 0.75
        noise_cdf = np.cumsum(noise / noise.sum())

        self.losses_ = []
        for epoch in range(self.epochs):
            centers, contexts = self._epoch_pairs(encoded, rng)
            n_pairs = centers.shape[0]
            if n_pairs == 0:
                self.losses_.append(0.0)
                continue
            loss_sum = 0.0
            for start in range(0, n_pairs, _BATCH_PAIRS):
                progress = (epoch + start / n_pairs) / self.epochs
                alpha = max(
                    self.min_learning_rate,
                    self.learning_rate * (1.0 - progress),
                )
                loss_sum += self._step(
                    w_in,
                    w_out,
                    centers[start : start + _BATCH_PAIRS],
                    contexts[start : start + _BATCH_PAIRS],
                    noise_cdf,
                    rng,
                    np.float32(alpha),
                )
            self.losses_.append(loss_sum / n_pairs)

        w_in.flags.writeable = False
        self.vectors_ = w_in
        self.n_features_in_ = 0
        return self

    def _epoch_pairs(self, encoded, rng):
        """Generate (center, context) index pairs for one epoch."""
        all_centers = []
        all_contexts = []
        for ids in encoded:
            length = ids.shape[0]
            pos = np.arange(length)
            b = rng.integers(1, self.window + 1, size=length)
            left = np.maximum(pos - b, 0)
            right = np.minimum(pos + b, length - 1)
            counts = right - left  # context slots excluding the center
            total = int(counts.sum())
            if total == 0:
                continue
            starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
            local = np.arange(total) - np.repeat(starts, counts)
            ctx = np.repeat(left, counts) + local
            # skip over the center position itself
            ctx += ctx >= np.repeat(pos, counts)
            all_centers.append(np.repeat(ids, counts))
            all_contexts.append(ids[ctx])
        if not all_centers:
            empty = np.empty(0, dtype=np.int64)
            return empty, empty
        return np.concatenate(all_centers), np.concatenate(all_contexts)

    def _step(self, w_in, w_out, ci, oi, noise_cdf, rng, alpha):
        """One mini-batch update; returns the summed pair loss."""
        batch = ci.shape[0]
        neg = np.searchsorted(noise_cdf, rng.random((batch, self.negatives)))

        v = w_in[ci]
        u_pos = w_out[oi]
        u_neg = w_out[neg]

        z_pos = np.einsum("bd,bd->b", v, u_pos).astype(np.float64)
        z_neg = np.einsum("bkd,bd->bk", u_neg, v).astype(np.float64)

        # -log sigma(z_pos) - sum -log sigma(-z_neg), in the stable
        # softplus form so saturated scores stay finite.
        loss = np.logaddexp(0.0, -z_pos).sum() + np.logaddexp(0.0, z_neg).sum()

        g_pos = (_sigmoid(z_pos) - 1.0).astype(np.float32)[:, None]
        g_neg = _sigmoid(z_neg).astype(np.float32)

        grad_v = g_pos * u_pos + np.einsum("bk,bkd->bd", g_neg, u_neg)

        # Frequent tokens repeat many times inside one batch; summing all
        # of their pair gradients (computed from the same stale row) and
        # applying them at once overshoots and diverges. Normalising each
        # row's accumulated gradient by its occurrence count keeps every
        # row's step bounded by a single-pair step: unique rows get plain
        # SGD, duplicated rows get the mean of their pair gradients.
        ci_scale = (-alpha / np.bincount(ci, minlength=w_in.shape[0])[ci]).astype(
            np.float32
        )
        np.add.at(w_in, ci, ci_scale[:, None] * grad_v)

        rows = np.concatenate([oi, neg.ravel()])
        grads = np.concatenate(
            [g_pos * v, (g_neg[:, :, None] * v[:, None, :]).reshape(-1, self.dim)]
        )
        row_scale = (-alpha / np.bincount(rows, minlength=w_out.shape[0])[rows]).astype(
            np.float32
        )
        np.add.at(w_out, rows, row_scale[:, None] * grads)
        return float(loss)

    # -- lookup -------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "vectors_"):
            raise NotFittedError("SkipGramEmbedder is not fitted yet")

    @property
    def vocab_size_(self) -> int:
        self._check_fitted()
        return self.vectors_.shape[0]

    def __contains__(self, token: str) -> bool:
        self._check_fitted()
        return token in self.vocab_

    def vector(self, token: str) -> np.ndarray | None:
        """Return the stored row for a token, or None when out of vocab."""
        self._check_fitted()
        idx = self.vocab_.get(token)
        if idx is None:
            return None
        return self.vectors_[idx]

    def export_text(self, path) -> None:
        """Write the classic text format: header line, then one token per line."""
        self._check_fitted()
        order = sorted(self.vocab_.items(), key=lambda kv: kv[1])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"{self.vectors_.shape[0]} {self.vectors_.shape[1]}\n")
            for token, idx in order:
                row = " ".join(f"{v:.8g}" for v in self.vectors_[idx])
                fh.write(f"{token} {row}\n")
