"""Command-line interface.

Exit codes:
  0  success
  2  usage error or bad configuration
  3  data error (unreadable or inconsistent corpus input)
  4  runtime error (bundle, harness, or model failure)
"""

import argparse
import json
import sys
from pathlib import Path

from sklearn.exceptions import NotFittedError

from . import __version__
from .bundle import load_model_bundle, save_model_bundle
from .config import MODEL_KINDS, RunConfig, load_config, model_factory
from .corpus import Corpus, load_corpus, save_corpus
from .ensemble import soft_vote
from .errors import BundleError, ConfigError, DataError, HarnessError
from .harness import (
    attack_corpus,
    run_cv,
    write_injection_csv,
    write_results_csv,
    write_summary_csv,
)
from .html_tokenizer import tokenize
from .keytokens import write_bow_triplets, write_vocabulary
from .splits import make_splits


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="corpus path (JSONL file or class directory)")
    p.add_argument(
        "--format",
        choices=("jsonl", "directory"),
        default="jsonl",
        help="corpus layout (default: jsonl)",
    )
    p.add_argument("--provenance", default=None, help="label for the corpus source")


def _add_config_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="YAML run configuration")


def _add_seed_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (required)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phishscreen",
        description="Phishing webpage classifier: URL character net + key-token forest.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="validate a corpus and write it back as canonical JSONL")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, help="output JSONL path")

    p = sub.add_parser("tokenize", help="tokenize HTML from stdin, one token per line")

    p = sub.add_parser("train", help="train on a corpus split and write a model bundle")
    _add_corpus_args(p)
    _add_config_arg(p)
    _add_seed_arg(p)
    p.add_argument("--out", required=True, help="output bundle path (.zip)")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--val-fraction", type=float, default=0.2)

    p = sub.add_parser("evaluate", help="cross-validated evaluation, writes per-fold metrics CSV")
    _add_corpus_args(p)
    _add_config_arg(p)
    _add_seed_arg(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="hybrid")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True, help="per-fold metrics CSV path")
    p.add_argument("--summary-out", default=None, help="optional mean/std summary CSV path")
    p.add_argument("--dataset-name", default=None, help="dataset column value (default: provenance or data stem)")

    p = sub.add_parser("reduce-sweep", help="evaluate across training-set reduction fractions")
    _add_corpus_args(p)
    _add_config_arg(p)
    _add_seed_arg(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="hybrid")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--fractions", type=float, nargs="+", default=None)
    p.add_argument("--out", required=True, help="per-fold metrics CSV path")
    p.add_argument("--summary-out", default=None)
    p.add_argument("--dataset-name", default=None)

    p = sub.add_parser("inject-eval", help="evaluate robustness to prepended donor text")
    _add_corpus_args(p)
    _add_config_arg(p)
    _add_seed_arg(p)
    p.add_argument("--donor-data", required=True, help="donor corpus path")
    p.add_argument("--donor-format", choices=("jsonl", "directory"), default="jsonl")
    p.add_argument("--donor-provenance", default=None)
    p.add_argument("--model", choices=MODEL_KINDS, default="hybrid")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--inject-words", type=int, default=None)
    p.add_argument("--out", required=True, help="clean/attacked metrics CSV path")
    p.add_argument("--dataset-name", default=None)

    p = sub.add_parser("predict", help="score one page with a trained bundle")
    p.add_argument("--bundle", required=True, help="model bundle path")
    p.add_argument("--url", required=True, help="page URL")
    p.add_argument("--html", required=True, help="path to the page HTML (or - for stdin)")

    p = sub.add_parser("export-features", help="dump embeddings, vocabulary, and BoW features")
    p.add_argument("--bundle", required=True, help="model bundle path")
    _add_corpus_args(p)
    p.add_argument("--out-dir", required=True, help="output directory")

    return parser


def _require_seed(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    if args.seed is None:
        parser.error(f"{args.command}: --seed is required for reproducible runs")
    return args.seed


def _load_cfg(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return RunConfig()


def _load_data(args: argparse.Namespace) -> Corpus:
    return load_corpus(args.data, format=args.format, provenance=args.provenance)


def _dataset_name(args: argparse.Namespace, corpus: Corpus) -> str:
    if getattr(args, "dataset_name", None):
        return args.dataset_name
    if corpus.provenance:
        return corpus.provenance
    return Path(args.data).stem


def _cmd_ingest(args) -> int:
    corpus = _load_data(args)
    save_corpus(corpus, args.out)
    counts = corpus.class_counts()
    print(f"samples={len(corpus.samples)}")
    print(f"phishing={counts[1]}")
    print(f"legitimate={counts[0]}")
    print(f"malformed={corpus.malformed_count}")
    print(f"out={args.out}")
    return 0


def _cmd_tokenize(args) -> int:
    html = sys.stdin.read()
    for token in tokenize(html):
        print(token)
    return 0


def _cmd_train(args, parser) -> int:
    seed = _require_seed(parser, args)
    cfg = _load_cfg(args)
    corpus = _load_data(args)
    plan = make_splits(
        corpus, seed=seed, test_fraction=args.test_fraction, val_fraction=args.val_fraction
    )
    by_id = {s.id: s for s in corpus.samples}
    train = [by_id[i] for i in plan.train_ids]
    val = [by_id[i] for i in plan.val_ids]
    model = model_factory(cfg, seed, "hybrid")()
    model.fit(train, [s.label for s in train], validation=(val, [s.label for s in val]))
    save_model_bundle(model, args.out)
    report = model.validation_report_
    print(f"train_n={len(train)}")
    print(f"val_n={len(val)}")
    print(f"test_n={len(plan.test_ids)}")
    for key in ("url_f1", "html_f1", "fused_f1", "w_url", "w_html"):
        print(f"{key}={report[key]:.6f}")
    print(f"bundle={args.out}")
    return 0


def _run_cv_command(args, parser, fractions) -> int:
    seed = _require_seed(parser, args)
    cfg = _load_cfg(args)
    corpus = _load_data(args)
    factory = model_factory(cfg, seed, args.model)
    dataset = _dataset_name(args, corpus)
    results = []
    for fraction in fractions:
        result = run_cv(corpus, factory, k=args.folds, seed=seed, fraction=fraction)
        results.append(result)
        report = result.clean_report
        print(
            f"fraction={fraction:g} folds={len(result.outcomes)} "
            f"f1_mean={report.mean.f1:.6f} f1_std={report.std.f1:.6f}"
        )
    write_results_csv(args.out, dataset, results)
    print(f"results={args.out}")
    if args.summary_out:
        write_summary_csv(args.summary_out, dataset, results)
        print(f"summary={args.summary_out}")
    return 0


def _cmd_evaluate(args, parser) -> int:
    return _run_cv_command(args, parser, fractions=(1.0,))


def _cmd_reduce_sweep(args, parser) -> int:
    cfg = _load_cfg(args)
    fractions = tuple(args.fractions) if args.fractions else cfg.reductions
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ConfigError(f"reduction fraction out of range: {f!r}")
    return _run_cv_command(args, parser, fractions=fractions)


def _cmd_inject_eval(args, parser) -> int:
    seed = _require_seed(parser, args)
    cfg = _load_cfg(args)
    corpus = _load_data(args)
    donor = load_corpus(args.donor_data, format=args.donor_format, provenance=args.donor_provenance)
    n_inject = args.inject_words if args.inject_words is not None else cfg.inject_words
    dataset = _dataset_name(args, corpus)
    donor_name = donor.provenance or Path(args.donor_data).stem
    per_model: dict[str, object] = {}
    for kind in ("hybrid", "cropped-bow"):
        factory = model_factory(cfg, seed, kind)
        result = run_cv(
            corpus,
            factory,
            k=args.folds,
            seed=seed,
            donor_corpus=donor,
            n_inject=n_inject,
        )
        per_model[kind] = result
        clean = result.clean_report
        attacked = result.attacked_report
        print(
            f"model={kind} clean_f1={clean.mean.f1:.6f} "
            f"attacked_f1={attacked.mean.f1:.6f}"
        )
    write_injection_csv(args.out, dataset, donor_name, per_model)
    print(f"results={args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model_bundle(args.bundle)
    if args.html == "-":
        html = sys.stdin.read()
    else:
        try:
            html = Path(args.html).read_text(encoding="utf-8", errors="replace")
        except OSError as exc:
            raise DataError(f"cannot read html {args.html}: {exc}") from exc

    class _Page:
        def __init__(self, url, html):
            self.url = url
            self.html = html

    page = _Page(args.url, html)
    p_url, p_html = model.branch_probabilities([page])
    vote = soft_vote(float(p_url[0]), float(p_html[0]), model.weights_)
    print(f"p_url={p_url[0]:.6f}")
    print(f"p_html={p_html[0]:.6f}")
    print(f"p_fused={vote.probability:.6f}")
    print(f"label={vote.label}")
    return 0


def _cmd_export_features(args) -> int:
    model = load_model_bundle(args.bundle)
    corpus = _load_data(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    extractor = model.extractor_
    extractor.embedder_.export_text(out_dir / "embeddings.txt")
    write_vocabulary(extractor.vocabulary_, out_dir / "vocab.txt")
    streams = [tokenize(s.html, s.id) for s in corpus.samples]
    bow = extractor.transform(streams)
    write_bow_triplets([s.id for s in corpus.samples], bow, out_dir / "bow_triplets.csv")
    print(f"embeddings={out_dir / 'embeddings.txt'}")
    print(f"vocab={out_dir / 'vocab.txt'}")
    print(f"bow={out_dir / 'bow_triplets.csv'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "tokenize":
            return _cmd_tokenize(args)
        if args.command == "train":
            return _cmd_train(args, parser)
        if args.command == "evaluate":
            return _cmd_evaluate(args, parser)
        if args.command == "reduce-sweep":
            return _cmd_reduce_sweep(args, parser)
        if args.command == "inject-eval":
            return _cmd_inject_eval(args, parser)
        if args.command == "predict":
            return _cmd_predict(args)
        if args.command == "export-features":
            return _cmd_export_features(args)
        parser.print_help()
        return 2
    except SystemExit as exc:  # parser.error inside a command
        return 0 if exc.code in (0, None) else 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (BundleError, HarnessError, NotFittedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
