"""Experiment harness: cross-validation, training reduction, injection.

Every experiment refits the full pipeline inside each fold using only
that fold's training data; the fold's test block never leaks into
embeddings, centroids, vocabulary or vote weights. Results are emitted
as CSV rows plus a mean/std summary.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .corpus import Corpus, Sample
from .errors import DataError, HarnessError
from .metrics import Metrics, MetricsReport, binary_metrics
from .splits import SplitPlan, make_cv_folds, reduce_training

DEFAULT_INJECT_WORDS = 2000


def inject_attack(sample: Sample, donor: Sample, n_words: int = DEFAULT_INJECT_WORDS) -> Sample:
    """Prepend the first n_words whitespace-delimited donor words.

    The injection happens on raw HTML, before any tokenization. The
    original document is preserved verbatim as a suffix; url and label
    are unchanged. The donor must carry the opposite label and
    non-empty HTML.
    """
    if donor.label == sample.label:
        raise DataError(
            f"donor {donor.id!r} has the same label as sample {sample.id!r}"
        )
    words = donor.html.split()
    if not words:
        raise DataError(f"donor {donor.id!r} has no words to inject")
    prefix = " ".join(words[:n_words])
    return replace(sample, html=prefix + "\n" + sample.html)


def attack_corpus(
    samples: list[Sample],
    donor_corpus: Corpus,
    source_provenance: str,
    n_words: int = DEFAULT_INJECT_WORDS,
    seed: int = 0,
) -> list[Sample]:
    """Return an attacked copy of each sample using opposite-class donors.

    Donors come from a different corpus than the samples under test;
    matching provenance tags are rejected.
    """
    if donor_corpus.provenance == source_provenance:
        raise HarnessError(
            "donor corpus must differ from the corpus under test "
            f"(both have provenance {source_provenance!r})"
        )
    donors_by_class: dict[int, list[Sample]] = {0: [], 1: []}
    for donor in donor_corpus:
        if donor.html.split():
            donors_by_class[int(donor.label)].append(donor)
    rng = np.random.default_rng([seed, 3])
    attacked = []
    for sample in samples:
        pool = donors_by_class[1 - int(sample.label)]
        if not pool:
            raise HarnessError(
                f"donor corpus has no usable samples of the class opposite to {sample.id!r}"
            )
        donor = pool[int(rng.integers(0, len(pool)))]
        attacked.append(inject_attack(sample, donor, n_words))
    return attacked


@dataclass(frozen=True)
class FoldOutcome:
    """Metrics for one fold, on clean and (optionally) attacked test data."""

    fold: int
    clean: Metrics
    attacked: Metrics | None = None


@dataclass(frozen=True)
class CvResult:
    """Cross-validation outcome at one reduction fraction."""

    fraction: float
    plans: tuple[SplitPlan, ...]
    outcomes: tuple[FoldOutcome, ...]

    @property
    def clean_report(self) -> MetricsReport:
        return MetricsReport(tuple(o.clean for o in self.outcomes))

    @property
    def attacked_report(self) -> MetricsReport | None:
        if any(o.attacked is None for o in self.outcomes):
            return None
        return MetricsReport(tuple(o.attacked for o in self.outcomes))

    def sizes(self) -> tuple[int, int, int]:
        return self.plans[0].sizes()


def run_cv(
    corpus: Corpus,
    model_factory,
    k: int = 5,
    seed: int = 0,
    fraction: float = 1.0,
    donor_corpus: Corpus | None = None,
    n_inject: int = DEFAULT_INJECT_WORDS,
    plans: list[SplitPlan] | None = None,
) -> CvResult:
    """Stratified k-fold evaluation of a model factory.

    The factory is called once per fold and must return an unfitted
    model whose ``fit(X, y, validation=...)`` accepts Samples. Any
    exception inside a fold aborts the run, tagged with the fold index.
    When a donor corpus is given, each fold is additionally scored on
    an injected copy of its test block.
    """
    if plans is None:
        plans = make_cv_folds(corpus, k=k, seed=seed)
    label_of = {s.id: s.label for s in corpus}
    if fraction != 1.0:
        plans = [
            reduce_training(plan, fraction, label_of, seed=seed + i)
            for i, plan in enumerate(plans)
        ]
    by_id = {s.id: s for s in corpus}

    outcomes = []
    for i, plan in enumerate(plans):
        try:
            train = [by_id[sid] for sid in plan.train_ids]
            val = [by_id[sid] for sid in plan.val_ids]
            test = [by_id[sid] for sid in plan.test_ids]
            y_train = [s.label for s in train]
            y_val = [s.label for s in val]
            y_test = np.array([int(s.label) for s in test], dtype=np.int64)

            model = model_factory()
            model.fit(train, y_train, validation=(val, y_val))
            clean = binary_metrics(y_test, model.predict(test))

            attacked_metrics = None
            if donor_corpus is not None:
                attacked = attack_corpus(
                    test,
                    donor_corpus,
                    source_provenance=corpus.provenance,
                    n_words=n_inject,
                    seed=seed + i,
                )
                attacked_metrics = binary_metrics(y_test, model.predict(attacked))
            outcomes.append(FoldOutcome(fold=i, clean=clean, attacked=attacked_metrics))
        except HarnessError:
            raise
        except Exception as exc:
            raise HarnessError(f"fold {i} failed: {exc}") from exc

    return CvResult(fraction=fraction, plans=tuple(plans), outcomes=tuple(outcomes))


# -- CSV emission ------------------------------------------------------

RESULTS_HEADER = ("dataset", "reduction", "fold", "accuracy", "f1", "precision", "recall")
SUMMARY_HEADER = (
    "dataset",
    "reduction",
    "train_n",
    "val_n",
    "test_n",
    "accuracy_mean",
    "accuracy_std",
    "f1_mean",
    "f1_std",
    "precision_mean",
    "precision_std",
    "recall_mean",
    "recall_std",
)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_results_csv(path, dataset: str, results: list[CvResult]) -> None:
    """Per-fold rows: (dataset, reduction, fold, accuracy, f1, precision, recall)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for result in results:
            for outcome in result.outcomes:
                m = outcome.clean
                writer.writerow(
                    (
                        dataset,
                        result.fraction,
                        outcome.fold,
                        _fmt(m.accuracy),
                        _fmt(m.f1),
                        _fmt(m.precision),
                        _fmt(m.recall),
                    )
                )


def write_summary_csv(path, dataset: str, results: list[CvResult]) -> None:
    """One row per reduction with mean/std across folds and block sizes."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for result in results:
            report = result.clean_report
            mean, std = report.mean, report.std
            train_n, val_n, test_n = result.sizes()
            writer.writerow(
                (
                    dataset,
                    result.fraction,
                    train_n,
                    val_n,
                    test_n,
                    _fmt(mean.accuracy),
                    _fmt(std.accuracy),
                    _fmt(mean.f1),
                    _fmt(std.f1),
                    _fmt(mean.precision),
                    _fmt(std.precision),
                    _fmt(mean.recall),
                    _fmt(std.recall),
                )
            )


INJECTION_HEADER = (
    "dataset",
    "donor",
    "model",
    "condition",
    "fold",
    "accuracy",
    "f1",
    "precision",
    "recall",
)


def write_injection_csv(path, dataset: str, donor: str, per_model: dict[str, CvResult]) -> None:
    """Clean vs attacked rows for each evaluated model."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(INJECTION_HEADER)
        for model_name, result in per_model.items():
            for outcome in result.outcomes:
                for condition, m in (("clean", outcome.clean), ("attacked", outcome.attacked)):
                    if m is None:
                        continue
                    writer.writerow(
                        (
                            dataset,
                            donor,
                            model_name,
                            condition,
                            outcome.fold,
                            _fmt(m.accuracy),
                            _fmt(m.f1),
                            _fmt(m.precision),
                            _fmt(m.recall),
                        )
                    )
