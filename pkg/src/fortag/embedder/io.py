"""Binary model files.

Layout (all integers little-endian)::

    b"FTAG"  u16 version
    u32 dim, u32 epoch, u8 word_ngrams, u32 min_count, u8 loss,
    f64 learning_rate, u64 buckets, u64 seed
    u32 word count, then per word: u32 byte length, UTF-8 bytes, u64 count
    u32 label count, then per label: u32 byte length, UTF-8 bytes
    input matrix:  u64 rows, u32 cols, rows*cols f32 row-major
    output matrix: u64 rows, u32 cols, rows*cols f32 row-major
"""
from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from fortag.embedder.model import LOSSES, ModelParams, TextClassifierModel, Vocabulary
from fortag.errors import FormatError, FortagError

MAGIC = b"FTAG"
VERSION = 1

_PARAMS = struct.Struct("<IIBIBdQQ")
_F32 = np.dtype("<f4")


def _write_str(fh: BinaryIO, s: str) -> None:
    raw = s.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _write_matrix(fh: BinaryIO, mat: np.ndarray) -> None:
    rows, cols = mat.shape
    fh.write(struct.pack("<QI", rows, cols))
    fh.write(np.ascontiguousarray(mat, dtype=_F32).tobytes())


def save_model(model: TextClassifierModel, path) -> None:
    if model.input_matrix.dtype != np.float32:
        raise FortagError("only single-precision models can be saved")
    p = model.params
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(
            _PARAMS.pack(
                p.dim, p.epoch, p.word_ngrams, p.min_count, LOSSES.index(p.loss),
                p.learning_rate, p.buckets, p.seed,
            )
        )
        fh.write(struct.pack("<I", len(model.vocab.words)))
        for word, count in model.vocab.words:
            _write_str(fh, word)
            fh.write(struct.pack("<Q", count))
        fh.write(struct.pack("<I", len(model.vocab.labels)))
        for label in model.vocab.labels:
            _write_str(fh, label)
        _write_matrix(fh, model.input_matrix)
        _write_matrix(fh, model.output_matrix)


class _Reader:
    def __init__(self, data: bytes, path) -> None:
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"{self.path}: truncated model file")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str | struct.Struct):
        s = fmt if isinstance(fmt, struct.Struct) else struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as err:
            raise FormatError(f"{self.path}: bad string: {err}") from err

    def matrix(self) -> np.ndarray:
        rows, cols = self.unpack("<QI")
        raw = self.take(rows * cols * 4)
        return np.frombuffer(raw, dtype=_F32).astype(np.float32).reshape(rows, cols)


def load_model(path) -> TextClassifierModel:
    with open(path, "rb") as fh:
        data = fh.read()
    r = _Reader(data, path)
    if r.take(4) != MAGIC:
        raise FormatError(f"{path}: not a model file (bad magic)")
    (version,) = r.unpack("<H")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported model version {version}")
    dim, epoch, ngrams, min_count, loss, lr, buckets, seed = r.unpack(_PARAMS)
    if loss >= len(LOSSES):
        raise FormatError(f"{path}: unknown loss code {loss}")
    try:
        params = ModelParams(dim, epoch, ngrams, min_count, LOSSES[loss], lr, buckets, seed)
    except FortagError as err:
        raise FormatError(f"{path}: invalid parameters: {err}") from err
    (nwords,) = r.unpack("<I")
    words = []
    for _ in range(nwords):
        word = r.string()
        (count,) = r.unpack("<Q")
        words.append((word, count))
    (nlabels,) = r.unpack("<I")
    labels = tuple(r.string() for _ in range(nlabels))
    inp = r.matrix()
    out = r.matrix()
    if r.pos != len(data):
        raise FormatError(f"{path}: trailing bytes after model data")
    try:
        return TextClassifierModel(params, Vocabulary(tuple(words), labels), inp, out)
    except FortagError as err:
        raise FormatError(f"{path}: inconsistent model: {err}") from err
