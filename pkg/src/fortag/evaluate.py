"""Precision/recall/F1 of channel models and journal→article transition matrices."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fortag.ensemble import EnsembleDecision
from fortag.errors import FortagError

NONE_LABEL = "none"


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int
    fp: int
    fn: int


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass(frozen=True)
class MetricsReport:
    """Per-class and aggregate scores.

    ``support`` of a class is ``tp + fn``. Macro averages run over classes
    with non-zero support.
    """

    per_class: dict[str, ClassMetrics]
    micro: ClassMetrics
    macro_precision: float
    macro_recall: float
    macro_f1: float
    n: int


def score_predictions(
    predicted: Sequence[str | None],
    gold: Sequence[Sequence[str]],
    labels: Sequence[str] | None = None,
) -> MetricsReport:
    """Score top-1 predictions against gold label sets.

    A prediction found in its gold set is a true positive for that label (the
    other gold labels are not counted as missed). A wrong prediction is a false
    positive for the predicted label and a false negative for every gold
    label; a missing prediction (None) only adds the false negatives.
    """
    if len(predicted) != len(gold):
        raise FortagError(f"{len(predicted)} predictions for {len(gold)} gold sets")
    if not predicted:
        raise FortagError("nothing to score")
    tp: dict[str, int] = {}
    fp: dict[str, int] = {}
    fn: dict[str, int] = {}
    seen: set[str] = set()
    for pred, gold_set in zip(predicted, gold):
        gold_set = set(gold_set)
        seen.update(gold_set)
        if pred is not None:
            seen.add(pred)
        if pred is not None and pred in gold_set:
            tp[pred] = tp.get(pred, 0) + 1
            continue
        if pred is not None:
            fp[pred] = fp.get(pred, 0) + 1
        for g in gold_set:
            fn[g] = fn.get(g, 0) + 1

    order = list(labels) if labels is not None else sorted(seen)
    order += sorted(seen - set(order))
    per_class = {}
    for lab in order:
        t, f_p, f_n = tp.get(lab, 0), fp.get(lab, 0), fn.get(lab, 0)
        per_class[lab] = ClassMetrics(*_prf(t, f_p, f_n), support=t + f_n, tp=t, fp=f_p, fn=f_n)

    TP, FP, FN = sum(tp.values()), sum(fp.values()), sum(fn.values())
    micro = ClassMetrics(*_prf(TP, FP, FN), support=TP + FN, tp=TP, fp=FP, fn=FN)
    supported = [m for m in per_class.values() if m.support > 0]
    k = len(supported)
    return MetricsReport(
        per_class=per_class,
        micro=micro,
        macro_precision=sum(m.precision for m in supported) / k if k else 0.0,
        macro_recall=sum(m.recall for m in supported) / k if k else 0.0,
        macro_f1=sum(m.f1 for m in supported) / k if k else 0.0,
        n=len(predicted),
    )


@dataclass(frozen=True)
class TransitionMatrix:
    """Counts with rows = journal-based label and columns = article-based label."""

    labels: tuple[str, ...]
    counts: np.ndarray

    def normalized(self) -> np.ndarray:
        """Row-stochastic variant; rows without support stay zero."""
        sums = self.counts.sum(axis=1, keepdims=True)
        return np.divide(self.counts, sums, out=np.zeros(self.counts.shape), where=sums > 0)


def build_transition_matrix(
    decisions: Sequence[EnsembleDecision], labels: Sequence[str] | None = None
) -> TransitionMatrix:
    """Tally journal-only label against final label; absent labels go to ``none``.

    ``labels`` fixes the row/column order (e.g. scheme order); labels seen in
    the decisions but not listed are appended alphabetically. ``none`` is last.
    """
    if not decisions:
        raise FortagError("no decisions to tally")
    pairs = [(d.journal_only_label or NONE_LABEL, d.final_label or NONE_LABEL) for d in decisions]
    seen = {lab for pair in pairs for lab in pair} - {NONE_LABEL}
    order = [lab for lab in (labels or []) if lab != NONE_LABEL]
    order += sorted(seen - set(order))
    order.append(NONE_LABEL)
    index = {lab: i for i, lab in enumerate(order)}
    counts = np.zeros((len(order), len(order)), dtype=np.int64)
    for r, c in pairs:
        counts[index[r], index[c]] += 1
    return TransitionMatrix(tuple(order), counts)


def _metric_rows(report: MetricsReport) -> list[list]:
    rows = [
        [lab, m.precision, m.recall, m.f1, m.support] for lab, m in report.per_class.items()
    ]
    m = report.micro
    rows.append(["micro", m.precision, m.recall, m.f1, m.support])
    rows.append(["macro", report.macro_precision, report.macro_recall, report.macro_f1, m.support])
    return rows


def _fmt(v) -> str:
    return f"{v:.4f}" if isinstance(v, float) else str(v)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _r4(v: float) -> float:
    return float(_fmt(float(v)))


def emit_reports(report: MetricsReport | TransitionMatrix, path) -> list[str]:
    """Write ``report`` as CSV at ``path`` plus a JSON mirror beside it.

    A transition matrix also gets a row-normalized variant
    (``<stem>.normalized.csv`` / ``.json``). Returns the written paths.
    """
    stem, _ = os.path.splitext(os.fspath(path))
    written = []
    try:
        if isinstance(report, MetricsReport):
            header = ["class", "precision", "recall", "f1", "support"]
            rows = _metric_rows(report)
            _write_csv(path, header, rows)
            _write_json(
                stem + ".json",
                {row[0]: dict(zip(header[1:], [_r4(v) for v in row[1:4]] + [row[4]])) for row in rows},
            )
            written += [os.fspath(path), stem + ".json"]
        elif isinstance(report, TransitionMatrix):
            header = ["journal\\article", *report.labels]
            counts = report.counts.tolist()
            norm = report.normalized().tolist()
            _write_csv(path, header, [[lab, *row] for lab, row in zip(report.labels, counts)])
            _write_csv(
                stem + ".normalized.csv",
                header,
                [[lab, *map(float, row)] for lab, row in zip(report.labels, norm)],
            )
            _write_json(stem + ".json", {"labels": list(report.labels), "counts": counts})
            _write_json(
                stem + ".normalized.json",
                {"labels": list(report.labels), "rows": [[_r4(v) for v in row] for row in norm]},
            )
            written += [os.fspath(path), stem + ".normalized.csv", stem + ".json", stem + ".normalized.json"]
        else:
            raise FortagError(f"cannot emit {type(report).__name__}")
    except OSError as err:
        raise FortagError(f"cannot write report to {path}: {err}") from err
    return written
