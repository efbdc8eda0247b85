"""Model containers: parameters, vocabulary and the trained classifier."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from fortag.embedder.text import featurize, tokenize
from fortag.errors import FortagError

SOFTMAX = "softmax"
OVA = "ova"
LOSSES = (SOFTMAX, OVA)


@dataclass(frozen=True)
class ModelParams:
    """Training hyper-parameters.

    Defaults follow the settings used for the per-channel models (50 epochs,
    word bigrams, one-vs-all loss, ``min_count`` 20, dimension 100); the
    learning rate and bucket count are the reference library's defaults.
    """

    dim: int = 100
    epoch: int = 50
    word_ngrams: int = 2
    min_count: int = 20
    loss: str = OVA
    learning_rate: float = 0.1
    buckets: int = 2_000_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise FortagError("dim must be >= 1")
        if self.epoch < 1:
            raise FortagError("epoch must be >= 1")
        if self.word_ngrams not in (1, 2, 3):
            raise FortagError("word_ngrams must be 1, 2 or 3")
        if self.min_count < 1:
            raise FortagError("min_count must be >= 1")
        if self.loss not in LOSSES:
            raise FortagError(f"loss must be one of {LOSSES}")
        if not self.learning_rate > 0:
            raise FortagError("learning_rate must be > 0")
        if self.buckets < 1:
            raise FortagError("buckets must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise FortagError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[tuple[str, int], ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        tokens = [w for w, _ in self.words]
        if len(set(tokens)) != len(tokens):
            raise FortagError("vocabulary tokens must be unique")
        if len(set(self.labels)) != len(self.labels):
            raise FortagError("labels must be unique")

    @cached_property
    def word_index(self) -> dict[str, int]:
        return {w: i for i, (w, _) in enumerate(self.words)}

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}


class Prediction(NamedTuple):
    label: str
    probability: float


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max()
    e = np.exp(z)
    return e / e.sum()


def _sigmoid(scores: np.ndarray) -> np.ndarray:
    out = np.empty_like(scores)
    pos = scores >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-scores[pos]))
    e = np.exp(scores[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass(frozen=True, eq=False)
class TextClassifierModel:
    """A trained averaged-embedding classifier.

    ``input_matrix`` has one row per vocabulary word followed by ``buckets``
    hashed n-gram rows; ``output_matrix`` has one row per label. Both arrays
    are read-only.
    """

    params: ModelParams
    vocab: Vocabulary
    input_matrix: np.ndarray
    output_matrix: np.ndarray

    def __post_init__(self) -> None:
        rows = len(self.vocab.words) + self.params.buckets
        if self.input_matrix.shape != (rows, self.params.dim):
            raise FortagError(
                f"input matrix shape {self.input_matrix.shape} != {(rows, self.params.dim)}"
            )
        if self.output_matrix.shape != (len(self.vocab.labels), self.params.dim):
            raise FortagError("output matrix shape does not match labels and dim")
        self.input_matrix.setflags(write=False)
        self.output_matrix.setflags(write=False)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.vocab.labels

    def features(self, text: str) -> list[int]:
        return featurize(tokenize(text), self.vocab, self.params)

    def hidden(self, feats: Sequence[int]) -> np.ndarray:
        return self.input_matrix[np.asarray(feats, dtype=np.int64)].mean(axis=0, dtype=np.float64)

    def probabilities(self, text: str) -> np.ndarray | None:
        """Probability of every label for ``text`` (None without features).

        Softmax-trained models return a distribution; one-vs-all models return
        independent per-label sigmoids.
        """
        feats = self.features(text)
        if not feats:
            return None
        scores = self.output_matrix.astype(np.float64) @ self.hidden(feats)
        if self.params.loss == SOFTMAX:
            return _softmax(scores)
        return _sigmoid(scores)

    def predict(self, text: str, k: int = 1, threshold: float = 0.0) -> list[Prediction]:
        return predict(self, text, k, threshold)

    def same_as(self, other: TextClassifierModel) -> bool:
        """Exact equality of parameters, vocabulary and matrix bits."""
        return (
            self.params == other.params
            and self.vocab == other.vocab
            and self.input_matrix.dtype == other.input_matrix.dtype
            and np.array_equal(self.input_matrix, other.input_matrix)
            and np.array_equal(self.output_matrix, other.output_matrix)
        )


def predict(
    model: TextClassifierModel, text: str, k: int = 1, threshold: float = 0.0
) -> list[Prediction]:
    """Top ``k`` labels whose probability is strictly above ``threshold``."""
    if k < 1:
        raise FortagError("k must be >= 1")
    probs = model.probabilities(text)
    if probs is None:
        return []
    order = np.argsort(-probs, kind="stable")[:k]
    return [
        Prediction(model.labels[i], float(probs[i])) for i in order if probs[i] > threshold
    ]
