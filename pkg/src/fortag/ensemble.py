"""Article-level field by plurality vote over the five channel models."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from fortag.corpus import PublicationRecord
from fortag.embedder.model import Prediction, TextClassifierModel
from fortag.embedder.text import normalize
from fortag.errors import FormatError, FortagError
from fortag.fields import FieldScheme
from fortag.sampler import CHANNELS, channel_text

JOURNAL_CHANNEL = "journal_title"


@dataclass(frozen=True)
class ChannelPrediction:
    channel: str
    prediction: Prediction | None = None

    def __post_init__(self) -> None:
        if self.channel not in CHANNELS:
            raise FortagError(f"unknown channel {self.channel!r}")


@dataclass(frozen=True)
class EnsemblePolicy:
    threshold: float = 0.5
    journal_weight_bonus: float = 0.01
    md_demotion: bool = True
    md_labels: frozenset[str] = frozenset({"Multidisciplinary", "MD"})

    def __post_init__(self) -> None:
        if not 0 <= self.threshold < 1:
            raise FortagError("threshold must be in [0, 1)")
        if not 0 < self.journal_weight_bonus < 1:
            raise FortagError("journal_weight_bonus must be in (0, 1)")


@dataclass(frozen=True)
class EnsembleDecision:
    channels: tuple[ChannelPrediction, ...]
    final_label: str | None
    journal_only_label: str | None
    pmid: str | None = None

    def to_json(self) -> dict:
        by_channel = {cp.channel: cp.prediction for cp in self.channels}
        return {
            "pmid": self.pmid,
            "channels": {
                ch: (
                    {"label": p.label, "probability": round(p.probability, 6)}
                    if (p := by_channel.get(ch)) is not None
                    else None
                )
                for ch in CHANNELS
            },
            "journal_only_label": self.journal_only_label,
            "final_label": self.final_label,
        }

    @classmethod
    def from_json(cls, obj: dict) -> EnsembleDecision:
        try:
            channels = tuple(
                ChannelPrediction(ch, Prediction(p["label"], float(p["probability"])) if p else None)
                for ch, p in obj.get("channels", {}).items()
            )
            return cls(channels, obj.get("final_label"), obj.get("journal_only_label"), obj.get("pmid"))
        except (KeyError, TypeError, AttributeError) as err:
            raise FormatError(f"malformed decision: {err}") from err


def combine(channels: Sequence[ChannelPrediction], policy: EnsemblePolicy = EnsemblePolicy()) -> str | None:
    """Vote for the article's field.

    Every channel whose prediction clears ``policy.threshold`` casts one vote;
    the journal-title channel adds ``journal_weight_bonus``. If the labels tied
    on raw vote count include the multidisciplinary label and a specific
    field, the specific field is preferred (``md_demotion``). Remaining ties go
    to the highest single-channel probability, then the smallest label.
    """
    seen = [cp.channel for cp in channels]
    dupes = sorted(ch for ch, n in Counter(seen).items() if n > 1)
    if dupes:
        raise FortagError(f"duplicate channel predictions: {', '.join(dupes)}")

    votes: Counter = Counter()
    journal: Counter = Counter()
    best_prob: dict[str, float] = {}
    for cp in channels:
        p = cp.prediction
        if p is None or not p.probability > policy.threshold:
            continue
        votes[p.label] += 1
        if cp.channel == JOURNAL_CHANNEL:
            journal[p.label] += 1
        best_prob[p.label] = max(best_prob.get(p.label, 0.0), p.probability)
    if not votes:
        return None

    candidates = list(votes)
    if policy.md_demotion:
        top = max(votes.values())
        tied = [lab for lab in candidates if votes[lab] == top]
        specific = [lab for lab in tied if lab not in policy.md_labels]
        if specific and len(specific) < len(tied):
            candidates = specific

    def rank(label: str):
        weight = votes[label] + policy.journal_weight_bonus * journal[label]
        return (-weight, -best_prob[label], label)

    return min(candidates, key=rank)


def check_models(models: Mapping[str, TextClassifierModel], scheme: FieldScheme | None = None) -> None:
    """Reject channel models that were not trained on one common field scheme.

    With a scheme, every model's labels must belong to it; without one, all
    models must share the same label set.
    """
    unknown = sorted(set(models) - set(CHANNELS))
    if unknown:
        raise FortagError(f"unknown channel(s): {', '.join(unknown)}")
    if scheme is not None:
        allowed = set(scheme.labels)
        for ch, model in models.items():
            extra = sorted(set(model.labels) - allowed)
            if extra:
                raise FortagError(f"{ch} model has labels outside the scheme: {extra}")
        return
    label_sets = {ch: frozenset(m.labels) for ch, m in models.items()}
    if len(set(label_sets.values())) > 1:
        raise FortagError(
            "channel models were trained on different label sets: "
            + "; ".join(f"{ch}={sorted(s)}" for ch, s in sorted(label_sets.items()))
        )


def channel_predictions(
    models: Mapping[str, TextClassifierModel], record: PublicationRecord, threshold: float
) -> tuple[ChannelPrediction, ...]:
    out = []
    for ch in CHANNELS:
        model = models.get(ch)
        text = channel_text(record, ch)
        pred = None
        if model is not None and normalize(text):
            top = model.predict(text, k=1, threshold=threshold)
            pred = top[0] if top else None
        out.append(ChannelPrediction(ch, pred))
    return tuple(out)


def classify_record(
    models: Mapping[str, TextClassifierModel],
    record: PublicationRecord,
    policy: EnsemblePolicy = EnsemblePolicy(),
    scheme: FieldScheme | None = None,
) -> EnsembleDecision:
    check_models(models, scheme)
    return _classify(models, record, policy)


def _classify(models, record, policy) -> EnsembleDecision:
    channels = channel_predictions(models, record, policy.threshold)
    journal = next(cp.prediction for cp in channels if cp.channel == JOURNAL_CHANNEL)
    return EnsembleDecision(
        channels=channels,
        final_label=combine(channels, policy),
        journal_only_label=journal.label if journal else None,
        pmid=record.pmid,
    )


def classify_records(
    models: Mapping[str, TextClassifierModel],
    records: Iterable[PublicationRecord],
    policy: EnsemblePolicy = EnsemblePolicy(),
    scheme: FieldScheme | None = None,
) -> list[EnsembleDecision]:
    check_models(models, scheme)
    return [_classify(models, rec, policy) for rec in records]


def write_decisions(decisions: Iterable[EnsembleDecision], out: TextIO) -> None:
    for d in decisions:
        out.write(json.dumps(d.to_json(), ensure_ascii=False) + "\n")


def read_decisions(source: Iterable[str]) -> list[EnsembleDecision]:
    out = []
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            out.append(EnsembleDecision.from_json(json.loads(line)))
        except (ValueError, FortagError) as err:
            raise FormatError(f"line {lineno}: {err}") from err
    return out
