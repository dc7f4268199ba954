"""Shared fixtures: small corpora and a cheaply trained full model."""

import numpy as np
import pytest
from hypothesis import settings

from phishscreen import (
    CharConvUrlClassifier,
    GiniRandomForest,
    HybridPhishClassifier,
    KeyTokenExtractor,
    SkipGramEmbedder,
    make_splits,
    make_synthetic_corpus,
    save_model_bundle,
)

settings.register_profile("repro", derandomize=True, max_examples=60, deadline=None)
settings.load_profile("repro")


def tiny_model_template(seed: int = 0) -> HybridPhishClassifier:
    """A full hybrid model scaled down so fitting takes a second or two."""
    return HybridPhishClassifier(
        extractor=KeyTokenExtractor(
            embedder=SkipGramEmbedder(dim=16, epochs=2, min_count=2, seed=seed + 1),
            select_m=200,
            vocab_cap=500,
            seed=seed + 2,
        ),
        forest=GiniRandomForest(n_trees=10, seed=seed + 3),
        urlnet=CharConvUrlClassifier(n_filters=8, epochs=2, seed=seed + 4),
        grid_step=0.05,
        seed=seed,
    )


@pytest.fixture(scope="session")
def tiny_corpus():
    return make_synthetic_corpus(n_samples=120, seed=0, doc_words=(40, 60))


@pytest.fixture(scope="session")
def tiny_split(tiny_corpus):
    plan = make_splits(tiny_corpus, seed=0)
    by_id = {s.id: s for s in tiny_corpus.samples}
    return {
        "plan": plan,
        "train": [by_id[i] for i in plan.train_ids],
        "val": [by_id[i] for i in plan.val_ids],
        "test": [by_id[i] for i in plan.test_ids],
    }


@pytest.fixture(scope="session")
def tiny_model(tiny_split):
    model = tiny_model_template(seed=0)
    train, val = tiny_split["train"], tiny_split["val"]
    model.fit(
        train,
        [s.label for s in train],
        validation=(val, [s.label for s in val]),
    )
    return model


@pytest.fixture(scope="session")
def tiny_bundle_path(tiny_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("bundle") / "model.zip"
    save_model_bundle(tiny_model, path)
    return path


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
