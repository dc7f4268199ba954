"""Character-level convolutional classifier for URLs.

The network is embedding -> 1-D convolution -> ReLU -> global max-pool
-> dense -> logistic, with forward and backward passes written out
explicitly in numpy. That keeps training deterministic for a fixed
seed and lets tests verify every analytic gradient against central
finite differences.
"""

import string
import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .validation import check_labels

URL_LENGTH = 180
PAD_INDEX = 0
OOV_INDEX = 1
ASCII_PRINTABLE = "".join(chr(c) for c in range(0x20, 0x7F))

_PROB_FLOOR = 1e-12


class UrlEncoder:
    """Map a URL to a fixed-length vector of character indices.

    Index 0 is padding and index 1 is the out-of-charset marker; real
    characters start at index 2. URLs are lowercased, truncated to
    ``length`` and right-padded with zeros.
    """

    def __init__(self, length: int = URL_LENGTH, charset: str = ASCII_PRINTABLE):
        if length <= 0:
            raise ValueError("length must be positive")
        self.length = length
        self.charset = charset
        self._index = {ch: i + 2 for i, ch in enumerate(charset)}

    @property
    def vocab_size(self) -> int:
        return len(self.charset) + 2

    def encode(self, url: str) -> np.ndarray:
        out = np.zeros(self.length, dtype=np.int64)
        for i, ch in enumerate(url.lower()[: self.length]):
            out[i] = self._index.get(ch, OOV_INDEX)
        return out

    def encode_batch(self, urls) -> np.ndarray:
        if len(urls) == 0:
            return np.zeros((0, self.length), dtype=np.int64)
        return np.stack([self.encode(u) for u in urls])


def encode_url(url: str, length: int = URL_LENGTH) -> np.ndarray:
    """Encode one URL with the default ASCII-printable charset."""
    return UrlEncoder(length=length).encode(url)


def _sigmoid64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _windows(E: np.ndarray, kernel: int) -> np.ndarray:
    """(B, L, D) -> (B, T, kernel*D) sliding windows, T = L - kernel + 1."""
    view = np.lib.stride_tricks.sliding_window_view(E, kernel, axis=1)
    # view: (B, T, D, kernel) -> (B, T, kernel, D)
    b, t = view.shape[0], view.shape[1]
    return np.ascontiguousarray(view.transpose(0, 1, 3, 2)).reshape(b, t, -1)


class CharConvUrlClassifier(BaseEstimator, ClassifierMixin):
    """Char-CNN over URLs with hand-written backprop.

    Args:
        embedding_dim: width of the character embedding table.
        n_filters: convolution output channels.
        kernel_size: convolution window, in characters.
        epochs: training passes; zero leaves the model at its init.
        learning_rate: SGD step size.
        batch_size: minibatch size.
        momentum: classic momentum coefficient (0 = plain SGD).
        url_length: fixed sequence length for string inputs.
        charset: characters recognized by the encoder.
        seed: controls init and batch shuffling.
        dtype: parameter dtype; float64 is useful for gradient checks.
    """

    def __init__(
        self,
        embedding_dim: int = 16,
        n_filters: int = 256,
        kernel_size: int = 5,
        epochs: int = 10,
        learning_rate: float = 1e-3,
        batch_size: int = 64,
        momentum: float = 0.0,
        url_length: int = URL_LENGTH,
        charset: str = ASCII_PRINTABLE,
        seed: int = 0,
        dtype: str = "float32",
    ):
        self.embedding_dim = embedding_dim
        self.n_filters = n_filters
        self.kernel_size = kernel_size
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.momentum = momentum
        self.url_length = url_length
        self.charset = charset
        self.seed = seed
        self.dtype = dtype

    # -- parameter handling -------------------------------------------

    def _init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        dt = np.dtype(self.dtype)
        vocab = len(self.charset) + 2
        de, f, k = self.embedding_dim, self.n_filters, self.kernel_size
        lim_conv = np.sqrt(6.0 / (k * de + f))
        lim_dense = np.sqrt(6.0 / (f + 1))
        return {
            "emb": (rng.normal(0.0, 0.1, (vocab, de))).astype(dt),
            "conv_w": rng.uniform(-lim_conv, lim_conv, (f, k, de)).astype(dt),
            "conv_b": np.zeros(f, dtype=dt),
            "dense_w": rng.uniform(-lim_dense, lim_dense, f).astype(dt),
            "dense_b": np.zeros(1, dtype=dt),
        }

    def _encode(self, X) -> np.ndarray:
        arr = np.asarray(X)
        if arr.ndim == 2 and np.issubdtype(arr.dtype, np.integer):
            if arr.shape[1] < self.kernel_size:
                raise ValueError("sequence length is shorter than the kernel")
            return arr.astype(np.int64, copy=False)
        encoder = UrlEncoder(length=self.url_length, charset=self.charset)
        return encoder.encode_batch(list(X))

    # -- forward / backward -------------------------------------------

    @staticmethod
    def _forward(params, Xidx):
        """Full forward pass; returns (probability, cache)."""
        emb, conv_w, conv_b = params["emb"], params["conv_w"], params["conv_b"]
        f = conv_w.shape[0]
        E = emb[Xidx]  # (B, L, De)
        win = _windows(E, conv_w.shape[1])  # (B, T, K*De)
        Z = win @ conv_w.reshape(f, -1).T + conv_b  # (B, T, F)
        A = np.maximum(Z, 0)
        amax = A.argmax(axis=1)  # (B, F)
        H = np.take_along_axis(A, amax[:, None, :], axis=1)[:, 0, :]
        z = H @ params["dense_w"] + params["dense_b"][0]
        p = _sigmoid64(z)
        return p, {"Xidx": Xidx, "win": win, "Z": Z, "amax": amax, "H": H, "z": z, "p": p}

    @staticmethod
    def _loss(z, p, y):
        """Mean binary cross-entropy, computed from the logit for stability."""
        z = np.asarray(z, dtype=np.float64)
        return float(np.mean(y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z)))

    @staticmethod
    def _backward(params, cache, y):
        """Gradients of the mean BCE loss for every parameter tensor."""
        emb, conv_w = params["emb"], params["conv_w"]
        f, k, de = conv_w.shape
        Xidx, win, Z, amax, H, p = (
            cache["Xidx"],
            cache["win"],
            cache["Z"],
            cache["amax"],
            cache["H"],
            cache["p"],
        )
        b, t, _ = Z.shape
        dt = conv_w.dtype

        dz = ((p - y) / b).astype(dt)  # (B,)
        d_dense_w = H.T @ dz
        d_dense_b = np.array([dz.sum()], dtype=dt)

        dH = np.outer(dz, params["dense_w"])  # (B, F)
        dA = np.zeros_like(Z)
        np.put_along_axis(dA, amax[:, None, :], dH[:, None, :], axis=1)
        dZ = dA * (Z > 0)

        dZ_flat = dZ.reshape(b * t, f)
        d_conv_w = (dZ_flat.T @ win.reshape(b * t, -1)).reshape(f, k, de)
        d_conv_b = dZ.sum(axis=(0, 1))

        d_win = (dZ_flat @ conv_w.reshape(f, -1)).reshape(b, t, k, de)
        dE = np.zeros((b, Xidx.shape[1], de), dtype=dt)
        for j in range(k):
            dE[:, j : j + t, :] += d_win[:, :, j, :]
        d_emb = np.zeros_like(emb)
        np.add.at(d_emb, Xidx.ravel(), dE.reshape(-1, de))

        return {
            "emb": d_emb,
            "conv_w": d_conv_w,
            "conv_b": d_conv_b,
            "dense_w": d_dense_w,
            "dense_b": d_dense_b,
        }

    def _loss_and_grads(self, params, Xidx, y):
        """One full-batch loss/gradient evaluation (used by gradient checks)."""
        p, cache = self._forward(params, Xidx)
        return self._loss(cache["z"], p, y), self._backward(params, cache, y)

    # -- training ------------------------------------------------------

    def fit(self, X, y):
        Xidx = self._encode(X)
        y = check_labels(y, Xidx.shape[0])
        if Xidx.shape[0] == 0:
            raise ValueError("cannot fit on zero samples")
        rng = np.random.default_rng(self.seed)
        params = self._init_params(rng)

        if np.unique(y).shape[0] > 1 and (Xidx == Xidx[0]).all():
            warnings.warn(
                "all encoded inputs are identical but labels differ; "
                "the task is not separable from URLs",
                UserWarning,
                stacklevel=2,
            )

        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        self.losses_ = []
        yf = y.astype(np.float64)
        for _ in range(self.epochs):
            order = rng.permutation(Xidx.shape[0])
            epoch_loss = 0.0
            for start in range(0, order.shape[0], self.batch_size):
                sel = order[start : start + self.batch_size]
                p, cache = self._forward(params, Xidx[sel])
                epoch_loss += self._loss(cache["z"], p, yf[sel]) * sel.shape[0]
                grads = self._backward(params, cache, yf[sel])
                for name, g in grads.items():
                    v = velocity[name]
                    v *= self.momentum
                    v -= self.learning_rate * g
                    params[name] += v
            self.losses_.append(epoch_loss / Xidx.shape[0])

        self.params_ = params
        self.n_features_in_ = Xidx.shape[1]
        self.classes_ = np.array([0, 1], dtype=np.int64)
        return self

    # -- inference -----------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("CharConvUrlClassifier is not fitted yet")

    def phishing_probability(self, X) -> np.ndarray:
        """Probability of phishing, strictly inside (0, 1)."""
        self._check_fitted()
        Xidx = self._encode(X)
        if Xidx.shape[0] == 0:
            return np.zeros(0, dtype=np.float64)
        p, _ = self._forward(self.params_, Xidx)
        return np.clip(p, _PROB_FLOOR, 1.0 - _PROB_FLOOR)

    def predict_proba(self, X) -> np.ndarray:
        p = self.phishing_probability(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.phishing_probability(X) >= 0.5).astype(np.int64)
