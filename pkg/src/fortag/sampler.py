"""Per-channel training documents, random/stratified sampling, train/test split."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from fortag.corpus import LabeledRecord
from fortag.embedder.text import normalize
from fortag.errors import FormatError, FortagError
from fortag.fields import FieldScheme, assign_fields

CHANNELS = ("title", "abstract", "keywords", "mesh", "journal_title")
RANDOM = "random"
STRATIFIED = "stratified"
LABEL_PREFIX = "__label__"

# independent generator streams derived from one user seed
_STREAM_SAMPLE = 0
_STREAM_SPLIT = 1


@dataclass(frozen=True)
class ChannelDocument:
    text: str
    labels: tuple[str, ...]
    source_pmid: str

    def __post_init__(self) -> None:
        if not self.text:
            raise FortagError(f"document {self.source_pmid}: empty text")
        if not self.labels:
            raise FortagError(f"document {self.source_pmid}: no label")


@dataclass(frozen=True)
class SamplingSpec:
    strategy: str = RANDOM
    target_size: int = 0
    seed: int = 0
    split_ratio: float = 0.9

    def __post_init__(self) -> None:
        if self.strategy not in (RANDOM, STRATIFIED):
            raise FortagError(f"unknown sampling strategy {self.strategy!r}")
        if not 0 < self.split_ratio < 1:
            raise FortagError("split_ratio must be strictly between 0 and 1")
        if self.target_size < 0:
            raise FortagError("target_size must be >= 0")
        if self.seed < 0:
            raise FortagError("seed must be non-negative")

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


@dataclass(frozen=True)
class DatasetSplit:
    train: list[ChannelDocument]
    test: list[ChannelDocument]


def channel_text(record, channel: str) -> str:
    """Raw text of one metadata channel of a publication record."""
    if channel == "keywords":
        return " ".join(record.keywords)
    if channel == "mesh":
        return " ".join(record.mesh_terms)
    if channel in ("title", "abstract", "journal_title"):
        return getattr(record, channel) or ""
    raise FortagError(f"unknown channel {channel!r}; expected one of {CHANNELS}")


def build_channel_documents(
    labeled: Sequence[LabeledRecord], scheme: FieldScheme, channel: str
) -> list[ChannelDocument]:
    """One document per record that has text on ``channel`` and a selected field."""
    if channel not in CHANNELS:
        raise FortagError(f"unknown channel {channel!r}; expected one of {CHANNELS}")
    docs = []
    for lr in labeled:
        labels = assign_fields(lr.for_codes, scheme)
        if not labels:
            continue
        text = normalize(channel_text(lr.record, channel))
        if text:
            docs.append(ChannelDocument(text, tuple(labels), lr.record.pmid))
    return docs


def sample_random(docs: Sequence[ChannelDocument], spec: SamplingSpec) -> list[ChannelDocument]:
    """Uniform sample without replacement, in random order."""
    if spec.target_size > len(docs):
        raise FortagError(f"cannot sample {spec.target_size} of {len(docs)} documents")
    picked = spec.rng(_STREAM_SAMPLE).permutation(len(docs))[: spec.target_size]
    return [docs[i] for i in picked]


def sample_stratified(
    docs: Sequence[ChannelDocument],
    spec: SamplingSpec,
    classes: Sequence[str] | None = None,
) -> list[ChannelDocument]:
    """Sample about ``target_size / n_classes`` documents per class.

    Classes are filled rarest first. A multi-label document counts toward the
    quota of every label it carries but is drawn at most once, so common
    classes can end slightly above quota. ``classes`` defaults to every label
    present in ``docs``; listing a class without documents is an error.
    """
    by_class: dict[str, list[int]] = defaultdict(list)
    for i, doc in enumerate(docs):
        for label in doc.labels:
            by_class[label].append(i)
    if classes is None:
        classes = sorted(by_class)
    missing = [c for c in classes if not by_class.get(c)]
    if missing:
        raise FortagError(f"no documents for class(es): {', '.join(missing)}")
    if not classes:
        raise FortagError("no classes to stratify over")
    if spec.target_size < len(classes):
        raise FortagError(f"target_size {spec.target_size} is below the {len(classes)} classes")

    quota = spec.target_size // len(classes)
    rng = spec.rng(_STREAM_SAMPLE)
    wanted = set(classes)
    counts: Counter = Counter()
    used: set[int] = set()
    picked: list[int] = []
    for label in sorted(classes, key=lambda c: (len(by_class[c]), c)):
        need = quota - counts[label]
        if need <= 0:
            continue
        pool = [i for i in by_class[label] if i not in used]
        for j in rng.permutation(len(pool))[:need]:
            i = pool[j]
            used.add(i)
            picked.append(i)
            counts.update(lab for lab in docs[i].labels if lab in wanted)
    return [docs[picked[j]] for j in rng.permutation(len(picked))]


def sample(docs: Sequence[ChannelDocument], spec: SamplingSpec, classes=None) -> list[ChannelDocument]:
    if spec.strategy == STRATIFIED:
        return sample_stratified(docs, spec, classes)
    return sample_random(docs, spec)


def split_train_test(docs: Sequence[ChannelDocument], spec: SamplingSpec) -> DatasetSplit:
    """Split by shuffled pmid so an article never lands on both sides."""
    groups: dict[str, list[ChannelDocument]] = {}
    for doc in docs:
        groups.setdefault(doc.source_pmid, []).append(doc)
    if len(groups) < 2:
        raise FortagError("need documents from at least 2 distinct pmids to split")
    pmids = list(groups)
    order = spec.rng(_STREAM_SPLIT).permutation(len(pmids))
    target = min(max(round(spec.split_ratio * len(docs)), 1), len(docs) - 1)

    train_ids: list[str] = []
    test_ids: list[str] = []
    size = 0
    for j in order:
        pmid = pmids[j]
        if size + len(groups[pmid]) <= target:
            train_ids.append(pmid)
            size += len(groups[pmid])
        else:
            test_ids.append(pmid)
    if not train_ids:
        train_ids.append(test_ids.pop(0))
    if not test_ids:
        test_ids.append(train_ids.pop())
    return DatasetSplit(
        train=[d for p in train_ids for d in groups[p]],
        test=[d for p in test_ids for d in groups[p]],
    )


def label_token(label: str) -> str:
    return LABEL_PREFIX + label.replace(" ", "_")


def write_training_file(docs: Iterable[ChannelDocument], out: TextIO) -> None:
    """One line per document: ``__label__`` tokens, then the text."""
    for doc in docs:
        out.write(" ".join([*(label_token(lab) for lab in doc.labels), doc.text]) + "\n")


def read_training_file(source: Iterable[str]) -> list[tuple[str, list[str]]]:
    """Parse training-format lines into ``(text, labels)`` pairs.

    Underscores in label tokens are read back as spaces.
    """
    out = []
    for lineno, line in enumerate(source, start=1):
        tokens = line.split()
        if not tokens:
            continue
        labels = []
        i = 0
        while i < len(tokens) and tokens[i].startswith(LABEL_PREFIX):
            label = tokens[i][len(LABEL_PREFIX) :].replace("_", " ")
            if not label:
                raise FormatError(f"line {lineno}: empty label token")
            if label not in labels:
                labels.append(label)
            i += 1
        if not labels:
            raise FormatError(f"line {lineno}: no __label__ token")
        out.append((" ".join(tokens[i:]), labels))
    return out
