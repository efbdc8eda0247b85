"""Word-vector introspection: nearest neighbours and analogies."""
from __future__ import annotations

import numpy as np

from fortag.embedder.model import TextClassifierModel
from fortag.embedder.text import tokenize
from fortag.errors import FortagError


def _token(word: str) -> str:
    tokens = tokenize(word)
    if len(tokens) != 1:
        raise FortagError(f"query {word!r} must be a single token")
    return tokens[0]


def word_id(model: TextClassifierModel, word: str) -> int:
    token = _token(word)
    try:
        return model.vocab.word_index[token]
    except KeyError:
        raise FortagError(f"{token!r} is not in the vocabulary") from None


def word_vectors(model: TextClassifierModel) -> np.ndarray:
    """Embeddings of the vocabulary words (float64 copy)."""
    return model.input_matrix[: len(model.vocab.words)].astype(np.float64)


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / np.where(norm > 0, norm, 1.0)


def _rank(model: TextClassifierModel, query: np.ndarray, exclude: set[int], k: int):
    if k < 1:
        raise FortagError("k must be >= 1")
    sims = _unit(word_vectors(model)) @ _unit(query)
    order = np.argsort(-sims, kind="stable")
    words = model.vocab.words
    out = []
    for i in order:
        if i in exclude:
            continue
        out.append((float(sims[i]), words[i][0]))
        if len(out) == k:
            break
    return out


def nearest_neighbors(model: TextClassifierModel, word: str, k: int = 10) -> list[tuple[float, str]]:
    """The ``k`` vocabulary words closest to ``word`` by cosine, excluding itself."""
    i = word_id(model, word)
    return _rank(model, word_vectors(model)[i], {i}, k)


def analogies(
    model: TextClassifierModel, a: str, b: str, c: str, k: int = 10
) -> list[tuple[float, str]]:
    """Answer "``a`` is to ``b`` as ``c`` is to ?".

    Ranks words by cosine to ``unit(b) - unit(a) + unit(c)``; the three query
    words are never returned.
    """
    ids = [word_id(model, w) for w in (a, b, c)]
    vecs = _unit(word_vectors(model)[ids])
    query = vecs[1] - vecs[0] + vecs[2]
    return _rank(model, query, set(ids), k)
