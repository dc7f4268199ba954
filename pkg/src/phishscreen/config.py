"""Declarative run configuration for the CLI and harness.

One document configures every stage. Unknown keys are rejected so a
typo cannot silently fall back to a default. The defaults here match
the module defaults exactly.
"""

import dataclasses
from dataclasses import dataclass, field

import yaml

from .embeddings import SkipGramEmbedder
from .errors import ConfigError
from .forest import GiniRandomForest
from .keytokens import KeyTokenExtractor
from .pipeline import CroppedBowClassifier, HybridPhishClassifier, LabelOracleClassifier
from .urlnet import CharConvUrlClassifier

MODEL_KINDS = ("hybrid", "cropped-bow", "oracle")


@dataclass
class EmbeddingsConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    min_count: int = 2
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    max_token_length: int | None = None


@dataclass
class ExtractorConfig:
    select_m: int = 2000
    vocab_cap: int = 20000
    kmeans_clusters: int | None = None
    kmeans_iters: int = 25


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    feature_rule: str | int = "sqrt"


@dataclass
class UrlNetConfig:
    embedding_dim: int = 16
    n_filters: int = 256
    kernel_size: int = 5
    epochs: int = 10
    learning_rate: float = 1e-3
    batch_size: int = 64
    momentum: float = 0.0
    url_length: int = 180


@dataclass
class EnsembleConfig:
    grid_step: float = 0.05


@dataclass
class SplitConfig:
    folds: int = 5
    test_fraction: float = 0.2
    val_fraction: float = 0.2


@dataclass
class BaselineConfig:
    crop_tokens: int = 2000


@dataclass
class RunConfig:
    seed: int | None = None
    embeddings: EmbeddingsConfig = field(default_factory=EmbeddingsConfig)
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    urlnet: UrlNetConfig = field(default_factory=UrlNetConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    reductions: tuple[float, ...] = (1.0, 0.5, 0.25, 0.10, 0.05)
    inject_words: int = 2000

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build_section(cls, raw, path: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"section {path!r} must be a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {path!r}: {', '.join(unknown)}")
    return cls(**raw)


def config_from_dict(raw: dict | None) -> RunConfig:
    """Build a RunConfig from a plain mapping, rejecting unknown keys."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a mapping")
    sections = {
        "embeddings": EmbeddingsConfig,
        "extractor": ExtractorConfig,
        "forest": ForestConfig,
        "urlnet": UrlNetConfig,
        "ensemble": EnsembleConfig,
        "split": SplitConfig,
        "baseline": BaselineConfig,
    }
    known = set(sections) | {"seed", "reductions", "inject_words"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")

    kwargs = {}
    for name, cls in sections.items():
        kwargs[name] = _build_section(cls, raw.get(name), name)
    if "seed" in raw and raw["seed"] is not None:
        if not isinstance(raw["seed"], int):
            raise ConfigError("seed must be an integer")
        kwargs["seed"] = raw["seed"]
    if "reductions" in raw:
        reductions = raw["reductions"]
        if not isinstance(reductions, (list, tuple)) or not reductions:
            raise ConfigError("reductions must be a non-empty list of fractions")
        for f in reductions:
            if not isinstance(f, (int, float)) or not 0.0 < float(f) <= 1.0:
                raise ConfigError(f"reduction fraction out of range: {f!r}")
        kwargs["reductions"] = tuple(float(f) for f in reductions)
    if "inject_words" in raw:
        if not isinstance(raw["inject_words"], int) or raw["inject_words"] <= 0:
            raise ConfigError("inject_words must be a positive integer")
        kwargs["inject_words"] = raw["inject_words"]
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    """Load a YAML (or JSON) config document."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return config_from_dict(raw)


# -- estimator factories ------------------------------------------------
#
# Child estimators get seeds derived from the master seed at fixed
# offsets, so one seed pins the whole run.


def build_classifier(cfg: RunConfig, seed: int) -> HybridPhishClassifier:
    emb = cfg.embeddings
    ext = cfg.extractor
    fo = cfg.forest
    un = cfg.urlnet
    return HybridPhishClassifier(
        extractor=KeyTokenExtractor(
            embedder=SkipGramEmbedder(
                dim=emb.dim,
                window=emb.window,
                negatives=emb.negatives,
                epochs=emb.epochs,
                min_count=emb.min_count,
                learning_rate=emb.learning_rate,
                min_learning_rate=emb.min_learning_rate,
                max_token_length=emb.max_token_length,
                seed=seed + 1,
            ),
            select_m=ext.select_m,
            vocab_cap=ext.vocab_cap,
            kmeans_clusters=ext.kmeans_clusters,
            kmeans_iters=ext.kmeans_iters,
            seed=seed + 2,
        ),
        forest=GiniRandomForest(
            n_trees=fo.n_trees,
            max_depth=fo.max_depth,
            min_leaf=fo.min_leaf,
            feature_rule=fo.feature_rule,
            seed=seed + 3,
        ),
        urlnet=CharConvUrlClassifier(
            embedding_dim=un.embedding_dim,
            n_filters=un.n_filters,
            kernel_size=un.kernel_size,
            epochs=un.epochs,
            learning_rate=un.learning_rate,
            batch_size=un.batch_size,
            momentum=un.momentum,
            url_length=un.url_length,
            seed=seed + 4,
        ),
        grid_step=cfg.ensemble.grid_step,
        val_fraction=cfg.split.val_fraction,
        seed=seed,
    )


def build_baseline(cfg: RunConfig, seed: int) -> CroppedBowClassifier:
    fo = cfg.forest
    return CroppedBowClassifier(
        crop_tokens=cfg.baseline.crop_tokens,
        vocab_cap=cfg.extractor.vocab_cap,
        forest=GiniRandomForest(
            n_trees=fo.n_trees,
            max_depth=fo.max_depth,
            min_leaf=fo.min_leaf,
            feature_rule=fo.feature_rule,
            seed=seed + 5,
        ),
    )


def model_factory(cfg: RunConfig, seed: int, kind: str = "hybrid"):
    """Return a zero-argument factory for the requested model kind."""
    if kind == "hybrid":
        return lambda: build_classifier(cfg, seed)
    if kind == "cropped-bow":
        return lambda: build_baseline(cfg, seed)
    if kind == "oracle":
        return lambda: LabelOracleClassifier()
    raise ConfigError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
