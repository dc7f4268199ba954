"""Input validation helpers shared by the estimators."""

import numpy as np

from .corpus import Label, Sample


def check_labels(y, n_expected: int | None = None) -> np.ndarray:
    """Coerce labels to an int array of {0, 1} (1 = phishing)."""
    arr = np.asarray([int(Label.parse(v)) for v in np.ravel(y)], dtype=np.int64)
    if n_expected is not None and arr.shape[0] != n_expected:
        raise ValueError(f"expected {n_expected} labels, got {arr.shape[0]}")
    return arr


def check_samples(X) -> list[Sample]:
    """Validate that X is a sequence of Sample-like objects."""
    samples = list(X)
    for n, s in enumerate(samples):
        if not hasattr(s, "url") or not hasattr(s, "html"):
            raise TypeError(f"item {n} is not a Sample (missing url/html): {type(s).__name__}")
    return samples


def check_probabilities(p, name: str = "probabilities") -> np.ndarray:
    """Coerce to a float array and require every value to lie in [0, 1]."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.size and (np.min(arr) < 0.0 or np.max(arr) > 1.0 or not np.all(np.isfinite(arr))):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def check_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Coerce to a 2-D numeric array, optionally enforcing a column count."""
    arr = np.asarray(X)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {arr.shape}")
    if n_features is not None and arr.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {arr.shape[1]}")
    return arr
