"""Text featurization: downcased alphanumeric tokens, n-grams, sparse weighting.

Tokenization lowercases the text and keeps maximal runs of alphanumeric
characters; everything else separates tokens.  N-grams of lengths n_min
through n_max are space-joined over the (optionally stopword-compacted)
token sequence.  Vocabularies are built from training text only, with
indices assigned in lexicographic n-gram order.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

WEIGHTING_SCHEMES = ("tf", "tfidf", "binary")

# Word characters minus underscore: Unicode alphanumeric runs.
_TOKEN_PATTERN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class RepresentationConfig:
    """N-gram extraction and weighting choices for one featurization."""

    n_min: int
    n_max: int
    weighting: str
    remove_stopwords: bool

    def __post_init__(self) -> None:
        if not 1 <= self.n_min <= self.n_max <= 3:
            raise ValueError(
                f"need 1 <= n_min <= n_max <= 3, got n_min={self.n_min} n_max={self.n_max}"
            )
        if self.weighting not in WEIGHTING_SCHEMES:
            raise ValueError(
                f"unknown weighting {self.weighting!r}, expected one of {WEIGHTING_SCHEMES}"
            )


@dataclass(frozen=True)
class Vocabulary:
    """N-gram index with document frequencies, built from a training corpus."""

    entries: dict[str, tuple[int, int]]  # n-gram -> (index, document frequency)
    n_docs: int

    @property
    def size(self) -> int:
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sorted (index, value) pairs within a fixed dimension; no explicit zeros."""

    indices: np.ndarray
    values: np.ndarray
    dim: int


def tokenize(text: str) -> list[str]:
    """Lowercase and split into maximal alphanumeric runs."""
    return _TOKEN_PATTERN.findall(text.lower())


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load a stoplist (one lowercase token per line; blank lines ignored).

    With no path, the packaged English list is used.
    """
    if path is None:
        text = (
            resources.files("textopt").joinpath("resources/stopwords.txt").read_text("utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def extract_ngrams(
    tokens: Sequence[str],
    n_min: int,
    n_max: int,
    remove_stopwords: bool = False,
    stoplist: frozenset[str] = frozenset(),
) -> Counter[str]:
    """Multiset of space-joined n-grams for every n in [n_min, n_max].

    Stopword removal compacts the token sequence before windowing, so n-grams
    may span removed positions.
    """
    if not 1 <= n_min <= n_max:
        raise ValueError(f"need 1 <= n_min <= n_max, got {n_min}, {n_max}")
    if remove_stopwords:
        tokens = [t for t in tokens if t not in stoplist]
    grams: Counter[str] = Counter()
    for n in range(n_min, n_max + 1):
        for i in range(len(tokens) - n + 1):
            grams[" ".join(tokens[i : i + n])] += 1
    return grams


def _doc_ngrams(text: str, config: RepresentationConfig, stoplist: frozenset[str]) -> Counter[str]:
    return extract_ngrams(
        tokenize(text), config.n_min, config.n_max, config.remove_stopwords, stoplist
    )


def build_vocabulary(
    texts: Sequence[str],
    config: RepresentationConfig,
    stoplist: frozenset[str] = frozenset(),
) -> Vocabulary:
    """Union of training n-grams with document frequencies, indexed lexicographically."""
    if not texts:
        raise ValueError("empty corpus")
    df: Counter[str] = Counter()
    for text in texts:
        df.update(_doc_ngrams(text, config, stoplist).keys())
    entries = {gram: (index, df[gram]) for index, gram in enumerate(sorted(df))}
    return Vocabulary(entries, n_docs=len(texts))


def _idf(n_docs: int, doc_freq: int) -> float:
    return math.log((1.0 + n_docs) / (1.0 + doc_freq)) + 1.0


def vectorize(
    text: str,
    vocab: Vocabulary,
    config: RepresentationConfig,
    stoplist: frozenset[str] = frozenset(),
) -> SparseVector:
    """Weight the document's in-vocabulary n-grams; unseen n-grams are dropped."""
    grams = _doc_ngrams(text, config, stoplist)
    items: list[tuple[int, float]] = []
    for gram, count in grams.items():
        entry = vocab.entries.get(gram)
        if entry is None:
            continue
        index, doc_freq = entry
        if config.weighting == "binary":
            value = 1.0
        elif config.weighting == "tf":
            value = float(count)
        else:
            value = count * _idf(vocab.n_docs, doc_freq)
        items.append((index, value))
    items.sort()
    indices = np.fromiter((i for i, _ in items), dtype=np.int64, count=len(items))
    values = np.fromiter((v for _, v in items), dtype=np.float64, count=len(items))
    return SparseVector(indices, values, dim=vocab.size)


def vectorize_corpus(
    texts: Iterable[str],
    vocab: Vocabulary,
    config: RepresentationConfig,
    stoplist: frozenset[str] = frozenset(),
) -> list[SparseVector]:
    return [vectorize(text, vocab, config, stoplist) for text in texts]
