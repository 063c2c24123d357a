"""Wiring from hyperparameter assignments to featurize/train/score evaluations."""

from __future__ import annotations

from collections import OrderedDict
from typing import Callable

from .data import LabeledCorpus
from .logreg import Model, TrainConfig, evaluate_accuracy, train
from .space import Assignment
from .textrep import RepresentationConfig, Vocabulary, build_vocabulary, vectorize_corpus

# Space-file spelling of the tf-idf scheme vs the internal identifier.
_WEIGHTING_ALIASES = {"tf-idf": "tfidf"}

# Canonical hyperparameter columns, matching the assignment node names.
REPORT_FIELDS = (
    "n_min",
    "n_max",
    "weighting",
    "remove_stopwords",
    "regularizer",
    "strength",
    "tolerance",
)


def _derive_n_max(assignment: Assignment) -> int | None:
    if "n_max" in assignment:
        return int(assignment["n_max"])
    if "n_min" not in assignment:
        return None
    span_keys = [k for k in assignment if k.startswith("n_span")]
    if not span_keys:
        return None
    return int(assignment["n_min"]) + int(assignment[span_keys[0]])


def assignment_to_configs(assignment: Assignment) -> tuple[RepresentationConfig, TrainConfig]:
    """Translate an assignment into featurization and training configurations.

    Expects the canonical node names: n_min, an n_span child (or n_max),
    weighting, remove_stopwords, regularizer, strength, tolerance.
    """
    n_max = _derive_n_max(assignment)
    missing = [
        key
        for key in ("n_min", "weighting", "remove_stopwords", "regularizer", "strength", "tolerance")
        if key not in assignment
    ]
    if n_max is None:
        missing.insert(1, "n_max (or an n_span child)")
    if missing:
        raise ValueError(f"assignment lacks required nodes: {', '.join(missing)}")
    weighting = str(assignment["weighting"])
    rep = RepresentationConfig(
        n_min=int(assignment["n_min"]),
        n_max=n_max,
        weighting=_WEIGHTING_ALIASES.get(weighting, weighting),
        remove_stopwords=bool(assignment["remove_stopwords"]),
    )
    cfg = TrainConfig(
        penalty=str(assignment["regularizer"]),
        strength=float(assignment["strength"]),
        tolerance=float(assignment["tolerance"]),
    )
    return rep, cfg


def report_values(assignment: Assignment) -> dict[str, object]:
    """The canonical hyperparameter values of an assignment; '-' when absent."""
    values: dict[str, object] = {field: "-" for field in REPORT_FIELDS}
    for field in REPORT_FIELDS:
        if field in assignment:
            values[field] = assignment[field]
    n_max = _derive_n_max(assignment)
    if n_max is not None:
        values["n_max"] = n_max
    return values


class _FeatureCache:
    """Bounded cache of featurizations keyed by representation config."""

    def __init__(self, maxsize: int = 12) -> None:
        self.maxsize = maxsize
        self._store: OrderedDict[RepresentationConfig, tuple] = OrderedDict()

    def get(self, key: RepresentationConfig, build: Callable[[], tuple]) -> tuple:
        if key in self._store:
            self._store.move_to_end(key)
            return self._store[key]
        value = build()
        self._store[key] = value
        while len(self._store) > self.maxsize:
            self._store.popitem(last=False)
        return value


def evaluate_assignment(
    assignment: Assignment,
    train_corpus: LabeledCorpus,
    eval_corpus: LabeledCorpus,
    stoplist: frozenset[str],
) -> float:
    """One featurize/train/score pass: accuracy of the trained model on eval_corpus."""
    model, vocab, rep = fit_assignment(assignment, train_corpus, stoplist)
    vectors = vectorize_corpus(eval_corpus.texts, vocab, rep, stoplist)
    return evaluate_accuracy(model, list(zip(vectors, (l for _, l in eval_corpus.documents))))


def fit_assignment(
    assignment: Assignment, train_corpus: LabeledCorpus, stoplist: frozenset[str]
) -> tuple[Model, Vocabulary, RepresentationConfig]:
    """Featurize the training corpus per the assignment and train a model on it."""
    rep, cfg = assignment_to_configs(assignment)
    vocab = build_vocabulary(train_corpus.texts, rep, stoplist)
    vectors = vectorize_corpus(train_corpus.texts, vocab, rep, stoplist)
    data = list(zip(vectors, (label for _, label in train_corpus.documents)))
    model = train(data, cfg, vocab.size, train_corpus.labels)
    return model, vocab, rep


def make_objective(
    train_corpus: LabeledCorpus,
    dev_corpus: LabeledCorpus,
    stoplist: frozenset[str],
    cache_size: int = 12,
) -> Callable[[Assignment], float]:
    """Dev-accuracy objective over (train, dev); featurizations are memoized.

    The cache only stores pure featurization results, so cached and uncached
    evaluations of the same assignment return identical values.
    """
    cache = _FeatureCache(cache_size)
    train_labels = [label for _, label in train_corpus.documents]
    dev_labels = [label for _, label in dev_corpus.documents]

    def objective(assignment: Assignment) -> float:
        rep, cfg = assignment_to_configs(assignment)

        def build() -> tuple:
            vocab = build_vocabulary(train_corpus.texts, rep, stoplist)
            x_train = vectorize_corpus(train_corpus.texts, vocab, rep, stoplist)
            x_dev = vectorize_corpus(dev_corpus.texts, vocab, rep, stoplist)
            return vocab, x_train, x_dev

        vocab, x_train, x_dev = cache.get(rep, build)
        model = train(list(zip(x_train, train_labels)), cfg, vocab.size, train_corpus.labels)
        return evaluate_accuracy(model, list(zip(x_dev, dev_labels)))

    return objective
