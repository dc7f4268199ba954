"""Sample data model and dataset loading.

A corpus is a list of labelled webpage samples. Two on-disk layouts are
supported: JSON Lines (one record per line with ``url``, ``html``,
``label`` and an optional ``id``) and a two-folder directory tree
(``<root>/phishing/*.html`` and ``<root>/legitimate/*.html`` with a
``<stem>.url`` sidecar file next to every page). JSON Lines is the
canonical interchange format; HTML payloads are stored verbatim.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import DataError

logger = logging.getLogger(__name__)

CORPUS_FORMATS = ("jsonl", "directory")


class Label(IntEnum):
    """Binary class label. Phishing is the positive class."""

    LEGITIMATE = 0
    PHISHING = 1

    @classmethod
    def parse(cls, value) -> "Label":
        """Parse a label from text (case-insensitive) or an integer 0/1."""
        if isinstance(value, Label):
            return value
        if isinstance(value, bool):
            return cls(int(value))
        if isinstance(value, (int, np.integer)):
            if int(value) in (0, 1):
                return cls(int(value))
            raise DataError(f"integer label must be 0 or 1, got {value!r}")
        if isinstance(value, str):
            name = value.strip().lower()
            if name == "phishing":
                return cls.PHISHING
            if name == "legitimate":
                return cls.LEGITIMATE
        raise DataError(f"unknown label value: {value!r}")

    def __str__(self) -> str:
        return "phishing" if self is Label.PHISHING else "legitimate"


@dataclass(frozen=True)
class Sample:
    """One webpage: a non-empty URL, raw HTML (may be empty) and a label."""

    id: str
    url: str
    html: str
    label: Label

    def __post_init__(self):
        if not self.id:
            raise DataError("sample id must be non-empty")
        if not self.url:
            raise DataError(f"sample {self.id!r}: url must be non-empty")


@dataclass
class Corpus:
    """A set of samples with unique ids plus a free-text provenance tag.

    ``malformed_count`` records how many input records were skipped while
    loading; the skip reasons are kept in ``malformed`` for reporting.
    """

    samples: list[Sample]
    provenance: str = ""
    malformed_count: int = 0
    malformed: list[str] = field(default_factory=list)

    def __post_init__(self):
        seen: dict[str, int] = {}
        for n, sample in enumerate(self.samples):
            if sample.id in seen:
                raise DataError(
                    f"duplicate sample id {sample.id!r} "
                    f"(records {seen[sample.id]} and {n})"
                )
            seen[sample.id] = n

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def class_counts(self) -> tuple[int, int]:
        """Return (n_legitimate, n_phishing); the two always sum to len."""
        n_phish = sum(1 for s in self.samples if s.label is Label.PHISHING)
        return len(self.samples) - n_phish, n_phish


def _record_from_json(line: str, line_no: int, fallback_id: str):
    """Parse one JSONL record. Returns a Sample or a skip-reason string."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        return f"line {line_no}: invalid JSON ({exc.msg})"
    if not isinstance(obj, dict):
        return f"line {line_no}: record is not an object"
    missing = [k for k in ("url", "html", "label") if k not in obj]
    if missing:
        return f"line {line_no}: missing field(s) {', '.join(missing)}"
    url = obj["url"]
    html = obj["html"]
    if not isinstance(url, str) or not url:
        return f"line {line_no}: url must be a non-empty string"
    if not isinstance(html, str):
        return f"line {line_no}: html must be a string"
    try:
        label = Label.parse(obj["label"])
    except DataError as exc:
        raise DataError(f"line {line_no}: {exc}") from None
    sample_id = obj.get("id", fallback_id)
    if not isinstance(sample_id, str) or not sample_id:
        return f"line {line_no}: id must be a non-empty string"
    return Sample(id=sample_id, url=url, html=html, label=label)


def _load_jsonl(path: Path, provenance: str) -> Corpus:
    samples: list[Sample] = []
    skipped: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = _record_from_json(line, line_no, f"line-{line_no:06d}")
            if isinstance(record, str):
                skipped.append(record)
                continue
            samples.append(record)
    return Corpus(
        samples=samples,
        provenance=provenance,
        malformed_count=len(skipped),
        malformed=skipped,
    )


def _load_directory(path: Path, provenance: str) -> Corpus:
    samples: list[Sample] = []
    skipped: list[str] = []
    for class_dir, label in (("phishing", Label.PHISHING), ("legitimate", Label.LEGITIMATE)):
        sub = path / class_dir
        if not sub.is_dir():
            raise DataError(f"missing class directory: {sub}")
        for html_path in sorted(sub.glob("*.html")):
            url_path = html_path.with_suffix(".url")
            if not url_path.is_file():
                skipped.append(f"{html_path.name}: missing sidecar {url_path.name}")
                continue
            url = url_path.read_text(encoding="utf-8", errors="replace").strip()
            if not url:
                skipped.append(f"{url_path.name}: empty url")
                continue
            html = html_path.read_text(encoding="utf-8", errors="replace")
            samples.append(
                Sample(id=f"{class_dir}/{html_path.stem}", url=url, html=html, label=label)
            )
    return Corpus(
        samples=samples,
        provenance=provenance,
        malformed_count=len(skipped),
        malformed=skipped,
    )


def load_corpus(path, format: str = "jsonl", provenance: str | None = None) -> Corpus:
    """Load a corpus from disk.

    Args:
        path: JSONL file or directory root, depending on ``format``.
        format: one of ``"jsonl"`` or ``"directory"``.
        provenance: free-text source tag; defaults to the path itself.

    Malformed records are counted, logged and skipped, never silently
    dropped. Unknown label strings and duplicate ids raise DataError.
    """
    if format not in CORPUS_FORMATS:
        raise DataError(f"unknown corpus format {format!r}; expected one of {CORPUS_FORMATS}")
    path = Path(path)
    if provenance is None:
        provenance = str(path)
    if format == "jsonl":
        if not path.is_file():
            raise DataError(f"corpus file not found: {path}")
        corpus = _load_jsonl(path, provenance)
    else:
        if not path.is_dir():
            raise DataError(f"corpus directory not found: {path}")
        corpus = _load_directory(path, provenance)
    if corpus.malformed_count:
        logger.warning(
            "skipped %d malformed record(s) while loading %s: %s",
            corpus.malformed_count,
            path,
            "; ".join(corpus.malformed[:10]),
        )
    return corpus


def save_corpus(corpus: Corpus, path) -> None:
    """Write a corpus as canonical JSON Lines (byte-stable for equal input)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in corpus.samples:
            record = {
                "html": sample.html,
                "id": sample.id,
                "label": str(sample.label),
                "url": sample.url,
            }
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
