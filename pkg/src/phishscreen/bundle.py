"""Trained-model serialization: one archive, named versioned sections.

The bundle is a ZIP archive (stored, not compressed, with zeroed
timestamps so identical models produce identical bytes). Numeric
payloads are raw little-endian arrays (float32 for all weights);
``manifest.json`` carries the format version, all estimator parameters,
and a SHA-256 checksum plus dtype/shape for every section. All model
state is kept in float32 end to end, so a save/load round trip
reproduces bit-identical predictions.
"""

import hashlib
import io
import json
import zipfile

import numpy as np

from .embeddings import SkipGramEmbedder
from .ensemble import VoteWeights
from .errors import BundleError
from .forest import GiniRandomForest, TreeNodes
from .keytokens import ClassCentroids, KeyTokenExtractor, Vocabulary
from .pipeline import HybridPhishClassifier
from .urlnet import CharConvUrlClassifier

FORMAT_VERSION = 1

_FIXED_DATE = (1980, 1, 1, 0, 0, 0)

REQUIRED_SECTIONS = (
    "embeddings/vocab.txt",
    "embeddings/vectors.f32",
    "centroids.f32",
    "vocabulary.txt",
    "forest/offsets.i64",
    "forest/feature.i32",
    "forest/threshold.f32",
    "forest/left.i32",
    "forest/right.i32",
    "forest/counts.i64",
    "urlnet/emb.f32",
    "urlnet/conv_w.f32",
    "urlnet/conv_b.f32",
    "urlnet/dense_w.f32",
    "urlnet/dense_b.f32",
    "ensemble.json",
)

_DTYPES = {"f32": "<f4", "i32": "<i4", "i64": "<i8"}


def _array_bytes(arr: np.ndarray, kind: str) -> bytes:
    return np.ascontiguousarray(arr.astype(_DTYPES[kind], copy=False)).tobytes()


def _text_bytes(lines) -> bytes:
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def _collect_sections(model: HybridPhishClassifier) -> tuple[dict[str, bytes], dict]:
    model._check_fitted()
    extractor = model.extractor_
    embedder = extractor.embedder_
    forest = model.forest_
    urlnet = model.urlnet_

    vocab_tokens = [t for t, _ in sorted(embedder.vocab_.items(), key=lambda kv: kv[1])]

    offsets = np.zeros(len(forest.trees_) + 1, dtype=np.int64)
    for i, tree in enumerate(forest.trees_):
        offsets[i + 1] = offsets[i] + tree.n_nodes
    cat = {
        "feature": np.concatenate([t.feature for t in forest.trees_]),
        "threshold": np.concatenate([t.threshold for t in forest.trees_]),
        "left": np.concatenate([t.left for t in forest.trees_]),
        "right": np.concatenate([t.right for t in forest.trees_]),
        "counts": np.concatenate([t.counts for t in forest.trees_]),
    }

    sections: dict[str, bytes] = {
        "embeddings/vocab.txt": _text_bytes(vocab_tokens),
        "embeddings/vectors.f32": _array_bytes(embedder.vectors_, "f32"),
        "centroids.f32": _array_bytes(
            np.stack([extractor.centroids_.legitimate, extractor.centroids_.phishing]),
            "f32",
        ),
        "vocabulary.txt": _text_bytes(list(extractor.vocabulary_.tokens)),
        "forest/offsets.i64": _array_bytes(offsets, "i64"),
        "forest/feature.i32": _array_bytes(cat["feature"], "i32"),
        "forest/threshold.f32": _array_bytes(cat["threshold"], "f32"),
        "forest/left.i32": _array_bytes(cat["left"], "i32"),
        "forest/right.i32": _array_bytes(cat["right"], "i32"),
        "forest/counts.i64": _array_bytes(cat["counts"], "i64"),
        "urlnet/emb.f32": _array_bytes(urlnet.params_["emb"], "f32"),
        "urlnet/conv_w.f32": _array_bytes(urlnet.params_["conv_w"], "f32"),
        "urlnet/conv_b.f32": _array_bytes(urlnet.params_["conv_b"], "f32"),
        "urlnet/dense_w.f32": _array_bytes(urlnet.params_["dense_w"], "f32"),
        "urlnet/dense_b.f32": _array_bytes(urlnet.params_["dense_b"], "f32"),
        "ensemble.json": json.dumps(
            {"w_html": model.weights_.w_html, "w_url": model.weights_.w_url},
            sort_keys=True,
            separators=(",", ":"),
        ).encode("utf-8"),
    }

    params = {
        "embedder": embedder.get_params(deep=False),
        "extractor": {
            k: v
            for k, v in extractor.get_params(deep=False).items()
            if k != "embedder"
        },
        "forest": forest.get_params(deep=False),
        "urlnet": urlnet.get_params(deep=False),
        "pipeline": {
            "grid_step": model.grid_step,
            "val_fraction": model.val_fraction,
            "seed": model.seed,
        },
        "shapes": {
            "embeddings/vectors.f32": list(embedder.vectors_.shape),
            "centroids.f32": [2, int(embedder.vectors_.shape[1])],
            "forest/counts.i64": [int(offsets[-1]), 2],
            "urlnet/emb.f32": list(urlnet.params_["emb"].shape),
            "urlnet/conv_w.f32": list(urlnet.params_["conv_w"].shape),
            "urlnet/conv_b.f32": list(urlnet.params_["conv_b"].shape),
            "urlnet/dense_w.f32": list(urlnet.params_["dense_w"].shape),
            "urlnet/dense_b.f32": list(urlnet.params_["dense_b"].shape),
        },
    }
    return sections, params


def save_model_bundle(model: HybridPhishClassifier, path) -> None:
    """Write a fitted model as a versioned single-file archive."""
    sections, params = _collect_sections(model)
    manifest = {
        "format_version": FORMAT_VERSION,
        "params": params,
        "sections": {
            name: {"length": len(data), "sha256": hashlib.sha256(data).hexdigest()}
            for name, data in sections.items()
        },
    }
    payloads = dict(sections)
    payloads["manifest.json"] = json.dumps(
        manifest, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")

    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name in sorted(payloads):
            info = zipfile.ZipInfo(name, date_time=_FIXED_DATE)
            info.compress_type = zipfile.ZIP_STORED
            info.external_attr = 0o600 << 16
            zf.writestr(info, payloads[name])


def _read_sections(path) -> tuple[dict, dict[str, bytes]]:
    try:
        zf = zipfile.ZipFile(path, "r")
    except (zipfile.BadZipFile, OSError) as exc:
        raise BundleError(f"unreadable bundle (truncated or not an archive): {exc}") from exc
    with zf:
        names = set(zf.namelist())
        if "manifest.json" not in names:
            raise BundleError("incomplete bundle: missing manifest.json")
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except (json.JSONDecodeError, zipfile.BadZipFile) as exc:
            raise BundleError(f"corrupt manifest: {exc}") from exc
        version = manifest.get("format_version")
        if version != FORMAT_VERSION:
            raise BundleError(
                f"format version mismatch: bundle has {version!r}, "
                f"this build supports {FORMAT_VERSION}"
            )
        missing = [s for s in REQUIRED_SECTIONS if s not in names]
        if missing:
            raise BundleError(f"incomplete bundle: missing section(s) {', '.join(missing)}")
        data: dict[str, bytes] = {}
        for name in REQUIRED_SECTIONS:
            try:
                payload = zf.read(name)
            except (zipfile.BadZipFile, OSError) as exc:
                raise BundleError(f"truncated section {name}: {exc}") from exc
            meta = manifest.get("sections", {}).get(name)
            if meta is None:
                raise BundleError(f"manifest does not describe section {name}")
            digest = hashlib.sha256(payload).hexdigest()
            if digest != meta.get("sha256"):
                raise BundleError(f"checksum failure in section {name}")
            data[name] = payload
    return manifest, data


def _array(data: bytes, kind: str, shape=None) -> np.ndarray:
    arr = np.frombuffer(data, dtype=_DTYPES[kind]).copy()
    if shape is not None:
        try:
            arr = arr.reshape(shape)
        except ValueError as exc:
            raise BundleError(f"section has wrong length for shape {shape}: {exc}") from exc
    return arr


def _lines(data: bytes) -> list[str]:
    text = data.decode("utf-8")
    return text.splitlines()


def load_model_bundle(path) -> HybridPhishClassifier:
    """Reconstruct a fitted model; predictions match the saved one exactly."""
    manifest, data = _read_sections(path)
    params = manifest.get("params", {})
    shapes = params.get("shapes", {})
    try:
        embedder = SkipGramEmbedder(**params["embedder"])
        vocab_tokens = _lines(data["embeddings/vocab.txt"])
        embedder.vocab_ = {tok: i for i, tok in enumerate(vocab_tokens)}
        vectors = _array(
            data["embeddings/vectors.f32"], "f32", shapes["embeddings/vectors.f32"]
        )
        vectors.flags.writeable = False
        embedder.vectors_ = vectors
        if len(vocab_tokens) != vectors.shape[0]:
            raise BundleError("embedding vocab and vector row count disagree")

        extractor = KeyTokenExtractor(
            embedder=SkipGramEmbedder(**params["embedder"]), **params["extractor"]
        )
        extractor.embedder_ = embedder
        cents = _array(data["centroids.f32"], "f32", shapes["centroids.f32"])
        extractor.centroids_ = ClassCentroids(legitimate=cents[0], phishing=cents[1])
        extractor.vocabulary_ = Vocabulary.from_ranked(_lines(data["vocabulary.txt"]))

        forest = GiniRandomForest(**params["forest"])
        offsets = _array(data["forest/offsets.i64"], "i64")
        feature = _array(data["forest/feature.i32"], "i32")
        threshold = _array(data["forest/threshold.f32"], "f32")
        left = _array(data["forest/left.i32"], "i32")
        right = _array(data["forest/right.i32"], "i32")
        counts = _array(data["forest/counts.i64"], "i64", shapes["forest/counts.i64"])
        trees = []
        for i in range(offsets.shape[0] - 1):
            lo, hi = int(offsets[i]), int(offsets[i + 1])
            trees.append(
                TreeNodes(
                    feature=feature[lo:hi],
                    threshold=threshold[lo:hi],
                    left=left[lo:hi],
                    right=right[lo:hi],
                    counts=counts[lo:hi],
                )
            )
        if not trees:
            raise BundleError("bundle contains an empty forest")
        forest.trees_ = trees
        forest.n_features_in_ = len(extractor.vocabulary_)
        forest.classes_ = np.array([0, 1], dtype=np.int64)

        urlnet = CharConvUrlClassifier(**params["urlnet"])
        urlnet.params_ = {
            "emb": _array(data["urlnet/emb.f32"], "f32", shapes["urlnet/emb.f32"]),
            "conv_w": _array(data["urlnet/conv_w.f32"], "f32", shapes["urlnet/conv_w.f32"]),
            "conv_b": _array(data["urlnet/conv_b.f32"], "f32", shapes["urlnet/conv_b.f32"]),
            "dense_w": _array(data["urlnet/dense_w.f32"], "f32", shapes["urlnet/dense_w.f32"]),
            "dense_b": _array(data["urlnet/dense_b.f32"], "f32", shapes["urlnet/dense_b.f32"]),
        }
        urlnet.n_features_in_ = urlnet.url_length
        urlnet.classes_ = np.array([0, 1], dtype=np.int64)

        ens = json.loads(data["ensemble.json"])
        weights = VoteWeights(w_url=ens["w_url"], w_html=ens["w_html"])

        model = HybridPhishClassifier(
            extractor=KeyTokenExtractor(
                embedder=SkipGramEmbedder(**params["embedder"]), **params["extractor"]
            ),
            forest=GiniRandomForest(**params["forest"]),
            urlnet=CharConvUrlClassifier(**params["urlnet"]),
            **params["pipeline"],
        )
        model.extractor_ = extractor
        model.forest_ = forest
        model.urlnet_ = urlnet
        model.weights_ = weights
        model.validation_report_ = manifest.get("validation_report", {})
        model.classes_ = np.array([0, 1], dtype=np.int64)
        return model
    except BundleError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise BundleError(f"malformed bundle contents: {exc!r}") from exc
