"""Soft-voting fusion of the URL and HTML branch probabilities."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .corpus import Label
from .metrics import binary_metrics
from .validation import check_probabilities

DECISION_THRESHOLD = 0.5
DEFAULT_GRID_STEP = 0.05
_SIMPLEX_TOL = 1e-6


@dataclass(frozen=True)
class VoteWeights:
    """A convex weight pair over the two branches."""

    w_url: float
    w_html: float

    def __post_init__(self):
        for name, w in (("w_url", self.w_url), ("w_html", self.w_html)):
            if not np.isfinite(w) or w < 0.0 or w > 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {w!r}")
        if abs(self.w_url + self.w_html - 1.0) > _SIMPLEX_TOL:
            raise ValueError(
                f"weights must sum to 1, got {self.w_url} + {self.w_html}"
            )


class VoteResult(NamedTuple):
    probability: float
    label: Label


def fuse_probabilities(p_url, p_html, weights: VoteWeights) -> np.ndarray:
    """Convex combination of two probability arrays."""
    pu = check_probabilities(p_url, "p_url")
    ph = check_probabilities(p_html, "p_html")
    if pu.shape != ph.shape:
        raise ValueError("branch probability arrays must have the same shape")
    return weights.w_url * pu + weights.w_html * ph


def soft_vote(p_url: float, p_html: float, weights: VoteWeights) -> VoteResult:
    """Fuse one probability pair; phishing when the result reaches 0.5.

    The fused value is a convex combination, so it always lies within
    [min(p_url, p_html), max(p_url, p_html)].
    """
    fused = float(fuse_probabilities([p_url], [p_html], weights)[0])
    label = Label.PHISHING if fused >= DECISION_THRESHOLD else Label.LEGITIMATE
    return VoteResult(probability=fused, label=label)


def weight_grid(grid_step: float = DEFAULT_GRID_STEP) -> np.ndarray:
    """The candidate w_url values: 0, step, 2*step, ..., 1."""
    if not 0.0 < grid_step <= 1.0:
        raise ValueError("grid_step must lie in (0, 1]")
    n = int(round(1.0 / grid_step))
    if abs(n * grid_step - 1.0) > _SIMPLEX_TOL:
        raise ValueError("grid_step must divide 1 evenly")
    return np.linspace(0.0, 1.0, n + 1)


def fit_weights(p_url, p_html, y_true, grid_step: float = DEFAULT_GRID_STEP) -> VoteWeights:
    """Grid-search the weight pair maximizing validation F1.

    Both single-branch extremes (w_url of 0 and 1) are members of the
    grid, so the selected F1 is never worse than either branch alone.
    Ties prefer the weight closest to 0.5, then the smaller w_url.
    """
    pu = check_probabilities(p_url, "p_url")
    ph = check_probabilities(p_html, "p_html")
    y = np.asarray(y_true, dtype=np.int64)
    if pu.shape[0] == 0:
        raise ValueError("validation set is empty; cannot fit vote weights")
    if not (pu.shape == ph.shape == y.shape):
        raise ValueError("p_url, p_html and y_true must have equal lengths")

    best_w = None
    best_key = None
    for w in weight_grid(grid_step):
        fused = w * pu + (1.0 - w) * ph
        f1 = binary_metrics(y, (fused >= DECISION_THRESHOLD).astype(np.int64)).f1
        key = (-f1, abs(w - 0.5), w)
        if best_key is None or key < best_key:
            best_key = key
            best_w = float(w)
    return VoteWeights(w_url=best_w, w_html=1.0 - best_w)
