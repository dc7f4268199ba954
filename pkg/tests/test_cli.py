"""Command-line interface: subcommands, exit codes, output formats."""

import io
import json
import subprocess
import sys

import numpy as np
import pytest

from phishscreen import (
    VoteWeights,
    __version__,
    load_corpus,
    load_model_bundle,
    make_donor_corpus,
    make_synthetic_corpus,
    save_corpus,
    save_model_bundle,
)
from phishscreen.cli import main

TINY_CONFIG = """\
embeddings: {dim: 12, epochs: 1, min_count: 2}
extractor: {select_m: 60, vocab_cap: 150}
forest: {n_trees: 8}
urlnet: {embedding_dim: 6, n_filters: 8, kernel_size: 3, epochs: 2, url_length: 40}
"""


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    save_corpus(make_synthetic_corpus(n_samples=80, seed=3), root / "corpus.jsonl")
    save_corpus(make_synthetic_corpus(n_samples=40, seed=4), root / "small.jsonl")
    save_corpus(make_donor_corpus(n_samples=8, seed=1), root / "donor.jsonl")
    (root / "tiny.yaml").write_text(TINY_CONFIG)
    return root


@pytest.fixture(scope="module")
def bundle(workdir):
    path = workdir / "model.zip"
    rc = main(
        [
            "train",
            "--data",
            str(workdir / "corpus.jsonl"),
            "--seed",
            "7",
            "--config",
            str(workdir / "tiny.yaml"),
            "--out",
            str(path),
        ]
    )
    assert rc == 0
    return path


def _kv_output(capsys):
    out = capsys.readouterr().out
    pairs = {}
    for line in out.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            pairs[key] = value
    return pairs


class TestTopLevel:
    def test_version_flag(self, capsys):
        assert main(["--version"]) == 0
        assert f"phishscreen {__version__}" in capsys.readouterr().out

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
        assert "COMMAND" in capsys.readouterr().out

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_console_script_installed(self):
        proc = subprocess.run(
            ["phishscreen", "--version"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert __version__ in proc.stdout


class TestIngest:
    def test_jsonl_round_trip(self, workdir, tmp_path, capsys):
        out = tmp_path / "canonical.jsonl"
        rc = main(
            ["ingest", "--data", str(workdir / "small.jsonl"), "--out", str(out)]
        )
        assert rc == 0
        pairs = _kv_output(capsys)
        assert pairs["samples"] == "40"
        assert pairs["phishing"] == "20"
        assert pairs["legitimate"] == "20"
        assert pairs["malformed"] == "0"
        assert len(load_corpus(out)) == 40

    def test_directory_format(self, tmp_path, capsys):
        for cls, url in (("phishing", "http://bad.example"), ("legitimate", "http://ok.example")):
            d = tmp_path / "tree" / cls
            d.mkdir(parents=True)
            (d / "page.html").write_text("<p>hello world</p>")
            (d / "page.url").write_text(url + "\n")
        out = tmp_path / "out.jsonl"
        rc = main(
            [
                "ingest",
                "--data",
                str(tmp_path / "tree"),
                "--format",
                "directory",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        corpus = load_corpus(out)
        assert {s.id for s in corpus.samples} == {"phishing/page", "legitimate/page"}

    def test_missing_corpus_is_data_error(self, tmp_path, capsys):
        rc = main(
            [
                "ingest",
                "--data",
                str(tmp_path / "absent.jsonl"),
                "--out",
                str(tmp_path / "o.jsonl"),
            ]
        )
        assert rc == 3

    def test_duplicate_ids_are_data_error(self, tmp_path, capsys):
        bad = tmp_path / "dup.jsonl"
        row = {"id": "x", "url": "http://a.example", "html": "<p>a</p>", "label": "phishing"}
        bad.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n")
        rc = main(["ingest", "--data", str(bad), "--out", str(tmp_path / "o.jsonl")])
        assert rc == 3


class TestTokenize:
    def test_stdin_to_one_token_per_line(self, capsys, monkeypatch):
        monkeypatch.setattr(sys, "stdin", io.StringIO('<div class="x">Hi</div>'))
        assert main(["tokenize"]) == 0
        assert capsys.readouterr().out.splitlines() == [
            "<div",
            "class",
            "x",
            "hi",
            "</div",
        ]


class TestTrain:
    def test_writes_bundle_and_report(self, workdir, bundle, capsys):
        assert bundle.exists()
        loaded = load_model_bundle(bundle)
        assert loaded.weights_.w_url + loaded.weights_.w_html == pytest.approx(1.0)

    def test_seed_is_required(self, workdir, tmp_path, capsys):
        rc = main(
            [
                "train",
                "--data",
                str(workdir / "corpus.jsonl"),
                "--out",
                str(tmp_path / "m.zip"),
            ]
        )
        assert rc == 2

    def test_bad_config_key_is_config_error(self, workdir, tmp_path, capsys):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("forest: {n_tress: 3}\n")
        rc = main(
            [
                "train",
                "--data",
                str(workdir / "corpus.jsonl"),
                "--seed",
                "1",
                "--config",
                str(cfg),
                "--out",
                str(tmp_path / "m.zip"),
            ]
        )
        assert rc == 2


class TestPredict:
    def test_scores_page_from_file(self, workdir, bundle, tmp_path, capsys):
        page = tmp_path / "page.html"
        page.write_text("<html><body><p>ph000 ph001 cm000</p></body></html>")
        rc = main(
            [
                "predict",
                "--bundle",
                str(bundle),
                "--url",
                "http://zzz-login.example/verify",
                "--html",
                str(page),
            ]
        )
        assert rc == 0
        pairs = _kv_output(capsys)
        assert set(pairs) == {"p_url", "p_html", "p_fused", "label"}
        w = load_model_bundle(bundle).weights_
        expected = w.w_url * float(pairs["p_url"]) + w.w_html * float(pairs["p_html"])
        assert float(pairs["p_fused"]) == pytest.approx(expected, abs=1e-5)
        assert pairs["label"] in {"phishing", "legitimate"}

    def test_html_dash_reads_stdin(self, bundle, capsys, monkeypatch):
        monkeypatch.setattr(sys, "stdin", io.StringIO("<p>cm000 cm001</p>"))
        rc = main(
            ["predict", "--bundle", str(bundle), "--url", "http://a.example", "--html", "-"]
        )
        assert rc == 0
        assert "p_fused=" in capsys.readouterr().out

    def test_url_only_bundle_fuses_to_url_branch(self, bundle, tmp_path, capsys):
        model = load_model_bundle(bundle)
        model.weights_ = VoteWeights(w_url=1.0, w_html=0.0)
        url_only = tmp_path / "url_only.zip"
        save_model_bundle(model, url_only)
        page = tmp_path / "page.html"
        page.write_text("<p>cm000 cm001 cm002</p>")
        rc = main(
            [
                "predict",
                "--bundle",
                str(url_only),
                "--url",
                "http://zzz.example/a",
                "--html",
                str(page),
            ]
        )
        assert rc == 0
        pairs = _kv_output(capsys)
        assert pairs["p_fused"] == pairs["p_url"]

    def test_missing_bundle_is_runtime_error(self, tmp_path, capsys):
        rc = main(
            [
                "predict",
                "--bundle",
                str(tmp_path / "absent.zip"),
                "--url",
                "http://a.example",
                "--html",
                "-",
            ]
        )
        assert rc == 4

    def test_missing_html_file_is_data_error(self, bundle, tmp_path, capsys):
        rc = main(
            [
                "predict",
                "--bundle",
                str(bundle),
                "--url",
                "http://a.example",
                "--html",
                str(tmp_path / "absent.html"),
            ]
        )
        assert rc == 3


class TestEvaluate:
    def test_oracle_evaluation_writes_perfect_csv(self, workdir, tmp_path, capsys):
        out = tmp_path / "results.csv"
        rc = main(
            [
                "evaluate",
                "--data",
                str(workdir / "small.jsonl"),
                "--model",
                "oracle",
                "--folds",
                "2",
                "--seed",
                "5",
                "--dataset-name",
                "tiny",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "dataset,reduction,fold,accuracy,f1,precision,recall"
        assert len(lines) == 3
        assert lines[1] == "tiny,1.0,0,1.000000,1.000000,1.000000,1.000000"

    def test_two_runs_are_byte_identical(self, workdir, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            rc = main(
                [
                    "evaluate",
                    "--data",
                    str(workdir / "small.jsonl"),
                    "--model",
                    "oracle",
                    "--folds",
                    "2",
                    "--seed",
                    "5",
                    "--dataset-name",
                    "tiny",
                    "--out",
                    str(out),
                ]
            )
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_summary_out_is_written(self, workdir, tmp_path, capsys):
        out, summary = tmp_path / "r.csv", tmp_path / "s.csv"
        rc = main(
            [
                "evaluate",
                "--data",
                str(workdir / "small.jsonl"),
                "--model",
                "oracle",
                "--folds",
                "2",
                "--seed",
                "5",
                "--out",
                str(out),
                "--summary-out",
                str(summary),
            ]
        )
        assert rc == 0
        header = summary.read_text().splitlines()[0]
        assert header.startswith("dataset,reduction,train_n,val_n,test_n")

    def test_hybrid_evaluation_runs(self, workdir, tmp_path, capsys):
        out = tmp_path / "hybrid.csv"
        rc = main(
            [
                "evaluate",
                "--data",
                str(workdir / "small.jsonl"),
                "--config",
                str(workdir / "tiny.yaml"),
                "--folds",
                "2",
                "--seed",
                "5",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3  # header + 2 folds


class TestReduceSweep:
    def test_rows_per_fraction_and_fold(self, workdir, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        rc = main(
            [
                "reduce-sweep",
                "--data",
                str(workdir / "small.jsonl"),
                "--model",
                "oracle",
                "--folds",
                "2",
                "--fractions",
                "1.0",
                "0.5",
                "--seed",
                "5",
                "--dataset-name",
                "tiny",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1 + 4
        assert {line.split(",")[1] for line in lines[1:]} == {"1.0", "0.5"}

    def test_default_fractions_come_from_config(self, workdir, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text("reductions: [1.0, 0.25]\n")
        rc = main(
            [
                "reduce-sweep",
                "--data",
                str(workdir / "small.jsonl"),
                "--config",
                str(cfg),
                "--model",
                "oracle",
                "--folds",
                "2",
                "--seed",
                "5",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert {line.split(",")[1] for line in lines[1:]} == {"1.0", "0.25"}

    def test_out_of_range_fraction_is_config_error(self, workdir, tmp_path, capsys):
        rc = main(
            [
                "reduce-sweep",
                "--data",
                str(workdir / "small.jsonl"),
                "--model",
                "oracle",
                "--fractions",
                "1.5",
                "--seed",
                "5",
                "--out",
                str(tmp_path / "x.csv"),
            ]
        )
        assert rc == 2


class TestInjectEval:
    def test_clean_and_attacked_csv(self, workdir, tmp_path, capsys):
        out = tmp_path / "inject.csv"
        rc = main(
            [
                "inject-eval",
                "--data",
                str(workdir / "small.jsonl"),
                "--donor-data",
                str(workdir / "donor.jsonl"),
                "--config",
                str(workdir / "tiny.yaml"),
                "--folds",
                "2",
                "--seed",
                "5",
                "--dataset-name",
                "tiny",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "dataset,donor,model,condition,fold,accuracy,f1,precision,recall"
        models = {line.split(",")[2] for line in lines[1:]}
        conditions = {line.split(",")[3] for line in lines[1:]}
        assert models == {"hybrid", "cropped-bow"}
        assert conditions == {"clean", "attacked"}

    def test_same_provenance_donor_is_runtime_error(self, workdir, tmp_path, capsys):
        rc = main(
            [
                "inject-eval",
                "--data",
                str(workdir / "small.jsonl"),
                "--provenance",
                "shared",
                "--donor-data",
                str(workdir / "donor.jsonl"),
                "--donor-provenance",
                "shared",
                "--folds",
                "2",
                "--seed",
                "5",
                "--out",
                str(tmp_path / "x.csv"),
            ]
        )
        assert rc == 4


class TestExportFeatures:
    def test_writes_three_artifacts(self, workdir, bundle, tmp_path, capsys):
        out_dir = tmp_path / "features"
        rc = main(
            [
                "export-features",
                "--bundle",
                str(bundle),
                "--data",
                str(workdir / "small.jsonl"),
                "--out-dir",
                str(out_dir),
            ]
        )
        assert rc == 0
        emb_lines = (out_dir / "embeddings.txt").read_text().splitlines()
        n, dim = map(int, emb_lines[0].split())
        assert len(emb_lines) == n + 1
        assert dim == 12

        vocab_lines = (out_dir / "vocab.txt").read_text().splitlines()
        model = load_model_bundle(bundle)
        assert tuple(vocab_lines) == model.extractor_.vocabulary_.tokens

        bow_lines = (out_dir / "bow_triplets.csv").read_text().splitlines()
        assert bow_lines[0] == "sample_id,vocab_index,count"
        corpus = load_corpus(workdir / "small.jsonl")
        ids = {s.id for s in corpus.samples}
        total = 0
        for line in bow_lines[1:]:
            sid, idx, count = line.split(",")
            assert sid in ids
            assert 0 <= int(idx) < len(vocab_lines)
            assert int(count) > 0
            total += int(count)
        assert total > 0
