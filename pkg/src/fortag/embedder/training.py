"""Vocabulary construction and SGD training."""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

import numpy as np

from fortag.embedder import _kernels
from fortag.embedder.model import SOFTMAX, ModelParams, TextClassifierModel, Vocabulary
from fortag.embedder.text import featurize, tokenize
from fortag.errors import FortagError

logger = logging.getLogger(__name__)

_INIT_CHUNK_ROWS = 1 << 16
_LOSS_CODES = {SOFTMAX: _kernels.LOSS_SOFTMAX, "ova": _kernels.LOSS_OVA}


def _check_dataset(dataset: Sequence[tuple[str, Sequence[str]]]) -> None:
    if not dataset:
        raise FortagError("training dataset is empty")
    for i, (_, labels) in enumerate(dataset):
        if not labels:
            raise FortagError(f"training document {i} has no label")


def build_vocabulary(
    dataset: Sequence[tuple[str, Sequence[str]]], min_count: int
) -> Vocabulary:
    """Count tokens and labels.

    Words with at least ``min_count`` occurrences are kept. Words and labels
    are ordered by descending count, ties broken alphabetically.
    """
    word_counts: Counter = Counter()
    label_counts: Counter = Counter()
    for text, labels in dataset:
        word_counts.update(tokenize(text))
        label_counts.update(set(labels))
    words = sorted(
        ((w, c) for w, c in word_counts.items() if c >= min_count), key=lambda wc: (-wc[1], wc[0])
    )
    labels = sorted(label_counts, key=lambda lab: (-label_counts[lab], lab))
    return Vocabulary(words=tuple(words), labels=tuple(labels))


def _csr(rows: Iterable[Sequence[int]]) -> tuple[np.ndarray, np.ndarray]:
    rows = list(rows)
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(r) for r in rows])
    data = np.fromiter((x for r in rows for x in r), dtype=np.int64, count=int(ptr[-1]))
    return data, ptr


def _init_input(rng: np.random.Generator, rows: int, dim: int, dtype) -> np.ndarray:
    bound = 1.0 / dim
    mat = np.empty((rows, dim), dtype=dtype)
    for start in range(0, rows, _INIT_CHUNK_ROWS):
        stop = min(rows, start + _INIT_CHUNK_ROWS)
        mat[start:stop] = rng.uniform(-bound, bound, size=(stop - start, dim))
    return mat


def train_with_history(
    dataset: Sequence[tuple[str, Sequence[str]]],
    params: ModelParams,
    *,
    workers: int = 1,
    dtype=np.float32,
) -> tuple[TextClassifierModel, list[float]]:
    """Train a model and return it with the mean training loss of each epoch.

    With ``workers == 1`` training is bit-reproducible for a fixed seed. More
    workers update the shared matrices concurrently without locks, so results
    vary between runs.
    """
    _check_dataset(dataset)
    if workers < 1:
        raise FortagError("workers must be >= 1")
    vocab = build_vocabulary(dataset, params.min_count)
    label_index = vocab.label_index
    feat_data, feat_ptr = _csr(featurize(tokenize(text), vocab, params) for text, _ in dataset)
    label_data, label_ptr = _csr(
        [label_index[lab] for lab in dict.fromkeys(labels)] for _, labels in dataset
    )

    rng = np.random.default_rng(params.seed)
    inp = _init_input(rng, len(vocab.words) + params.buckets, params.dim, dtype)
    out = np.zeros((len(vocab.labels), params.dim), dtype=dtype)

    n = len(dataset)
    total_visits = float(params.epoch * n)
    loss_code = _LOSS_CODES[params.loss]
    history: list[float] = []
    results = np.zeros((workers, 2), dtype=np.float64)

    def run(epoch: int, order: np.ndarray, draws: np.ndarray, w: int) -> None:
        _kernels.train_positions(
            inp, out, feat_data, feat_ptr, label_data, label_ptr, order, draws,
            loss_code, params.learning_rate, float(epoch * n), total_visits, w, workers,
            results[w],
        )

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for epoch in range(params.epoch):
            order = rng.permutation(n)
            draws = rng.integers(0, 2**31 - 1, size=n, dtype=np.int64)
            if pool is None:
                run(epoch, order, draws, 0)
            else:
                list(pool.map(lambda w: run(epoch, order, draws, w), range(workers)))
            trained = results[:, 1].sum()
            history.append(float(results[:, 0].sum() / trained) if trained else float("nan"))
            logger.debug("epoch %d/%d loss %.6f", epoch + 1, params.epoch, history[-1])
    finally:
        if pool is not None:
            pool.shutdown()

    if not (np.isfinite(inp).all() and np.isfinite(out).all()):
        raise FortagError("training diverged: non-finite weights (lower the learning rate)")
    return TextClassifierModel(params=params, vocab=vocab, input_matrix=inp, output_matrix=out), history


def train(
    dataset: Sequence[tuple[str, Sequence[str]]],
    params: ModelParams,
    *,
    workers: int = 1,
    dtype=np.float32,
) -> TextClassifierModel:
    """Train a supervised classifier on ``(text, labels)`` pairs."""
    return train_with_history(dataset, params, workers=workers, dtype=dtype)[0]


def loss_and_gradients(
    input_matrix: np.ndarray,
    output_matrix: np.ndarray,
    feats: Sequence[int],
    gold: Sequence[int],
    loss: str,
    target: int | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss of one document and its gradients w.r.t. both matrices.

    Runs the training kernel with unit step on copies, so the gradients are
    exactly the updates SGD applies. ``gold`` lists label indices; ``target``
    selects the softmax label (defaults to the first gold label).
    """
    inp = np.array(input_matrix, copy=True)
    out = np.array(output_matrix, copy=True)
    gold_vec = np.zeros(out.shape[0], dtype=inp.dtype)
    gold_vec[list(gold)] = 1.0
    if target is None:
        target = gold[0]
    dim = inp.shape[1]
    value = _kernels.sgd_step(
        inp, out, np.asarray(feats, dtype=np.int64), gold_vec, target, _LOSS_CODES[loss], 1.0,
        np.zeros(dim, dtype=inp.dtype), np.zeros(dim, dtype=inp.dtype),
        np.zeros(out.shape[0], dtype=inp.dtype),
    )
    return float(value), input_matrix - inp, output_matrix - out
