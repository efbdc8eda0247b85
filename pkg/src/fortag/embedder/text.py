"""Tokenization, n-gram hashing and feature extraction."""
from __future__ import annotations

import re
from functools import lru_cache
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from fortag.embedder.model import ModelParams, Vocabulary

_TOKEN_RE = re.compile(r"[^\W_]+")

FNV_OFFSET_64 = 0xCBF29CE484222325
FNV_PRIME_64 = 0x100000001B3
_MASK_64 = 0xFFFFFFFFFFFFFFFF


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into maximal runs of letters and digits."""
    if not text:
        return []
    return _TOKEN_RE.findall(text.lower())


def normalize(text: str) -> str:
    return " ".join(tokenize(text))


@lru_cache(maxsize=1 << 20)
def fnv1a_64(text: str) -> int:
    """64-bit FNV-1a hash of the UTF-8 encoding of ``text``."""
    h = FNV_OFFSET_64
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME_64) & _MASK_64
    return h


def featurize(tokens: Sequence[str], vocab: Vocabulary, params: ModelParams) -> list[int]:
    """Feature row indices for a token sequence.

    In-vocabulary words map to their word id; every run of 2..word_ngrams
    adjacent tokens (in or out of vocabulary) maps to a hashed bucket row
    placed after the word rows. Duplicates are kept.
    """
    index = vocab.word_index
    nwords = len(vocab.words)
    feats = [index[t] for t in tokens if t in index]
    for n in range(2, params.word_ngrams + 1):
        for i in range(len(tokens) - n + 1):
            gram = " ".join(tokens[i : i + n])
            feats.append(nwords + fnv1a_64(gram) % params.buckets)
    return feats
