"""Stratified data splitting: hold-out plan, k-fold plans, reduction.

The single-split protocol is 80/20 corpus to (train+validation)/test,
then 20% of the train+validation block becomes validation, i.e. a
64/16/20 overall layout. Training reduction subsamples train and
validation only; the test block of a plan is never touched, so learning
curves are comparable point to point.
"""

from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus, Label
from .errors import HarnessError

TEST_FRACTION = 0.2
VAL_FRACTION = 0.2
DEFAULT_REDUCTIONS = (1.0, 0.5, 0.25, 0.10, 0.05)


@dataclass(frozen=True)
class SplitPlan:
    """Sample ids assigned to each role; the three sets are disjoint.

    ``fractions`` records the nominal overall (train, val, test) shares
    the plan was drawn with; ``seed`` the RNG seed. Both are metadata:
    reduction changes actual sizes but keeps the design label.
    """

    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    fractions: tuple[float, float, float] | None = None
    seed: int | None = None

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train_ids), len(self.val_ids), len(self.test_ids)


def _class_quotas(class_sizes: np.ndarray, n_take: int) -> np.ndarray:
    """Largest-remainder allocation of n_take across classes."""
    total = int(class_sizes.sum())
    if n_take > total:
        raise ValueError("cannot take more samples than available")
    exact = n_take * class_sizes / total if total else class_sizes * 0.0
    base = np.floor(exact).astype(np.int64)
    remainder = exact - base
    deficit = n_take - int(base.sum())
    order = np.lexsort((np.arange(class_sizes.shape[0]), -remainder))
    for j in order[:deficit]:
        base[j] += 1
    return base


def _stratified_pick(ids_by_class: list[list[str]], n_take: int, rng) -> set[str]:
    sizes = np.array([len(ids) for ids in ids_by_class], dtype=np.int64)
    quotas = _class_quotas(sizes, n_take)
    picked: set[str] = set()
    for ids, quota in zip(ids_by_class, quotas):
        perm = rng.permutation(len(ids))
        picked.update(ids[i] for i in perm[: int(quota)])
    return picked


def _by_class(ids: list[str], label_of: dict[str, Label]) -> list[list[str]]:
    groups: list[list[str]] = [[], []]
    for sid in ids:
        groups[int(label_of[sid])].append(sid)
    return groups


def make_splits(
    corpus: Corpus,
    seed: int,
    test_fraction: float = TEST_FRACTION,
    val_fraction: float = VAL_FRACTION,
) -> SplitPlan:
    """Stratified 64/16/20 plan (at the default fractions).

    The test block is floor(test_fraction * n); validation is
    floor(val_fraction * remaining). Per-class counts follow the corpus
    ratio to within one sample. Deterministic for a fixed seed.
    """
    label_of = {s.id: s.label for s in corpus}
    all_ids = [s.id for s in corpus]
    rng = np.random.default_rng([seed, 0])

    n_test = int(np.floor(test_fraction * len(all_ids)))
    test = _stratified_pick(_by_class(all_ids, label_of), n_test, rng)
    train_val = [sid for sid in all_ids if sid not in test]

    n_val = int(np.floor(val_fraction * len(train_val)))
    val = _stratified_pick(_by_class(train_val, label_of), n_val, rng)
    train = [sid for sid in train_val if sid not in val]

    return SplitPlan(
        train_ids=tuple(train),
        val_ids=tuple(sid for sid in train_val if sid in val),
        test_ids=tuple(sid for sid in all_ids if sid in test),
        fractions=(
            (1.0 - test_fraction) * (1.0 - val_fraction),
            (1.0 - test_fraction) * val_fraction,
            test_fraction,
        ),
        seed=seed,
    )


def make_cv_folds(
    corpus: Corpus,
    k: int = 5,
    seed: int = 0,
    val_fraction: float = VAL_FRACTION,
) -> list[SplitPlan]:
    """Stratified k-fold plans over the whole corpus.

    The k test blocks are disjoint and cover every sample exactly once.
    Within each fold the remaining samples get a fresh stratified
    validation carve-out of val_fraction.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(corpus) < k:
        raise ValueError(f"corpus of {len(corpus)} samples cannot form {k} folds")
    label_of = {s.id: s.label for s in corpus}
    all_ids = [s.id for s in corpus]
    rng = np.random.default_rng([seed, 1])

    chunks: list[list[str]] = [[] for _ in range(k)]
    for ids in _by_class(all_ids, label_of):
        ids_arr = list(ids)
        perm = rng.permutation(len(ids_arr))
        for pos, j in enumerate(perm):
            chunks[pos % k].append(ids_arr[j])

    plans = []
    for i in range(k):
        test = set(chunks[i])
        train_val = [sid for sid in all_ids if sid not in test]
        n_val = int(np.floor(val_fraction * len(train_val)))
        val = _stratified_pick(_by_class(train_val, label_of), n_val, rng)
        plans.append(
            SplitPlan(
                train_ids=tuple(sid for sid in train_val if sid not in val),
                val_ids=tuple(sid for sid in train_val if sid in val),
                test_ids=tuple(sid for sid in all_ids if sid in test),
                fractions=(
                    (1.0 - 1.0 / k) * (1.0 - val_fraction),
                    (1.0 - 1.0 / k) * val_fraction,
                    1.0 / k,
                ),
                seed=seed,
            )
        )
    return plans


def reduce_training(
    plan: SplitPlan,
    fraction: float,
    label_of: dict[str, Label],
    seed: int = 0,
) -> SplitPlan:
    """Stratified subsample of train and validation; test is untouched.

    New sizes are floor(fraction * size), allocated across classes by
    largest remainder. fraction 1.0 returns the plan unchanged.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    if fraction == 1.0:
        return plan
    rng = np.random.default_rng([seed, 2])

    def shrink(ids: tuple[str, ...]) -> tuple[str, ...]:
        n_new = int(np.floor(fraction * len(ids)))
        keep = _stratified_pick(_by_class(list(ids), label_of), n_new, rng)
        return tuple(sid for sid in ids if sid in keep)

    reduced = replace(plan, train_ids=shrink(plan.train_ids), val_ids=shrink(plan.val_ids))
    kept_classes = {label_of[sid] for sid in reduced.train_ids}
    if len(kept_classes) < 2:
        raise HarnessError(
            f"reduction to {fraction} left the training split without both classes"
        )
    return reduced
