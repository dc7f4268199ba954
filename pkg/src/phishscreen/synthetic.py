"""Synthetic webpage corpora for experiments and tests.

Pages are small HTML documents whose text tokens come from
class-specific and shared pools under a Zipf-like frequency profile, so
the two classes overlap but remain distinguishable. URLs carry a weak
signal: a marker trigram appears in phishing URLs more often than in
legitimate ones. A donor corpus (disjoint token pools, long documents)
supports injection experiments.
"""

import argparse

import numpy as np

from .corpus import Corpus, Label, Sample, save_corpus

_LETTERS = np.array(list("abcdefghijklmnopqrtuvwy"))  # no s/x/z: reserved
URL_MARKER = "zzz"


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1)
    return w / w.sum()


def _pool(prefix: str, n: int) -> np.ndarray:
    return np.array([f"{prefix}{i:03d}" for i in range(n)])


def _random_word(rng, lo=4, hi=10) -> str:
    return "".join(rng.choice(_LETTERS, size=int(rng.integers(lo, hi + 1))))


def _make_url(rng, label: Label, marker_rates: tuple[float, float]) -> str:
    host = "-".join(_random_word(rng) for _ in range(int(rng.integers(1, 3))))
    rate = marker_rates[0] if label is Label.PHISHING else marker_rates[1]
    if rng.random() < rate:
        cut = int(rng.integers(0, len(host) + 1))
        host = host[:cut] + URL_MARKER + host[cut:]
    path = "/".join(_random_word(rng, 3, 8) for _ in range(int(rng.integers(1, 4))))
    return f"http://{host}.example/{path}"


def _make_html(rng, words: list[str]) -> str:
    parts = [f"<html><head><title>{' '.join(words[:2])}</title></head><body>"]
    body = words[2:]
    for start in range(0, len(body), 12):
        chunk = body[start : start + 12]
        if not chunk:
            break
        parts.append(f'<p class="t{start % 7}">{" ".join(chunk)}</p>')
    parts.append("</body></html>")
    return "".join(parts)


def make_synthetic_corpus(
    n_samples: int = 2000,
    seed: int = 0,
    doc_words: tuple[int, int] = (80, 160),
    class_token_prob: float = 0.45,
    pool_size: int = 150,
    token_prefix: str = "",
    url_marker_rates: tuple[float, float] = (0.65, 0.25),
    provenance: str = "synthetic",
) -> Corpus:
    """Balanced labelled corpus with overlapping token distributions.

    Args:
        n_samples: total pages; labels alternate, so the corpus is
            balanced to within one sample.
        seed: generator seed; the same arguments reproduce the corpus.
        doc_words: inclusive range of text words per page.
        class_token_prob: chance a word comes from the label's own pool
            rather than the shared pool.
        pool_size: tokens per pool (phishing / legitimate / shared).
        token_prefix: prepended to every pool token; lets a second
            corpus use a disjoint token universe.
        url_marker_rates: probability that a (phishing, legitimate) URL
            contains the weak URL marker.
        provenance: tag stored on the corpus.
    """
    rng = np.random.default_rng([seed, 5])
    pools = {
        Label.PHISHING: _pool(f"{token_prefix}ph", pool_size),
        Label.LEGITIMATE: _pool(f"{token_prefix}lg", pool_size),
    }
    shared = _pool(f"{token_prefix}cm", pool_size)
    weights = _zipf_weights(pool_size)

    samples = []
    for i in range(n_samples):
        label = Label.PHISHING if i % 2 == 0 else Label.LEGITIMATE
        n_words = int(rng.integers(doc_words[0], doc_words[1] + 1))
        own = rng.random(n_words) < class_token_prob
        from_own = rng.choice(pools[label], size=n_words, p=weights)
        from_shared = rng.choice(shared, size=n_words, p=weights)
        words = np.where(own, from_own, from_shared).tolist()
        samples.append(
            Sample(
                id=f"{provenance}-{i:06d}",
                url=_make_url(rng, label, url_marker_rates),
                html=_make_html(rng, words),
                label=label,
            )
        )
    return Corpus(samples=samples, provenance=provenance)


def make_donor_corpus(
    n_samples: int = 120,
    seed: int = 1,
    doc_words: tuple[int, int] = (2200, 2600),
    provenance: str = "synthetic-donor",
) -> Corpus:
    """Long-document corpus with a token universe disjoint from the main one."""
    return make_synthetic_corpus(
        n_samples=n_samples,
        seed=seed,
        doc_words=doc_words,
        token_prefix="dn",
        provenance=provenance,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m phishscreen.synthetic",
        description="Write a synthetic corpus as JSON Lines.",
    )
    parser.add_argument("--out", required=True, help="output .jsonl path")
    parser.add_argument("--n", type=int, default=1000, help="number of samples")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--donor", action="store_true", help="generate the long-document donor corpus"
    )
    args = parser.parse_args(argv)
    if args.donor:
        corpus = make_donor_corpus(n_samples=args.n, seed=args.seed)
    else:
        corpus = make_synthetic_corpus(n_samples=args.n, seed=args.seed)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} samples to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
