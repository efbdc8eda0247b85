"""Selection of classification fields from FoR code distributions.

Two-digit codes above a share threshold become classes directly. A few large
two-digit parents ("drill-down" parents) are expanded: their 4-digit codes above
a second threshold become classes and the rest fall into an "Other <parent>"
bucket. On 2019 PubMed data this produces 17 fields.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

from fortag.corpus import MULTIDISCIPLINARY, ForCodeSet, LabeledRecord
from fortag.errors import FormatError, FortagError

DIRECT_2DIGIT = "direct-2digit"
DIRECT_4DIGIT = "direct-4digit"
OTHER_BUCKET = "other-bucket"
MULTIDISCIPLINARY_KIND = "multidisciplinary"
KINDS = (DIRECT_2DIGIT, DIRECT_4DIGIT, OTHER_BUCKET, MULTIDISCIPLINARY_KIND)

# ANZSRC 2008 Fields of Research, 2-digit divisions plus the 4-digit groups
# used in biomedical literature.
FOR_NAMES: dict[str, str] = {
    "MD": "Multidisciplinary",
    "01": "Mathematical Sciences",
    "02": "Physical Sciences",
    "03": "Chemical Sciences",
    "04": "Earth Sciences",
    "05": "Environmental Sciences",
    "06": "Biological Sciences",
    "07": "Agricultural and Veterinary Sciences",
    "08": "Information and Computing Sciences",
    "09": "Engineering",
    "10": "Technology",
    "11": "Medical and Health Sciences",
    "12": "Built Environment and Design",
    "13": "Education",
    "14": "Economics",
    "15": "Commerce, Management, Tourism and Services",
    "16": "Studies in Human Society",
    "17": "Psychology and Cognitive Sciences",
    "18": "Law and Legal Studies",
    "19": "Studies in Creative Arts and Writing",
    "20": "Language, Communication and Culture",
    "21": "History and Archaeology",
    "22": "Philosophy and Religious Studies",
    "0601": "Biochemistry and Cell Biology",
    "0602": "Ecology",
    "0603": "Evolutionary Biology",
    "0604": "Genetics",
    "0605": "Microbiology",
    "0606": "Physiology",
    "0607": "Plant Biology",
    "0608": "Zoology",
    "0699": "Other Biological Sciences",
    "0903": "Biomedical Engineering",
    "1101": "Medical Biochemistry and Metabolomics",
    "1102": "Cardiorespiratory Medicine and Haematology",
    "1103": "Clinical Sciences",
    "1104": "Complementary and Alternative Medicine",
    "1105": "Dentistry",
    "1106": "Human Movement and Sports Science",
    "1107": "Immunology",
    "1108": "Medical Microbiology",
    "1109": "Neurosciences",
    "1110": "Nursing",
    "1111": "Nutrition and Dietetics",
    "1112": "Oncology and Carcinogenesis",
    "1113": "Ophthalmology and Optometry",
    "1114": "Paediatrics and Reproductive Medicine",
    "1115": "Pharmacology and Pharmaceutical Sciences",
    "1116": "Medical Physiology",
    "1117": "Public Health and Health Services",
    "1199": "Other Medical and Health Sciences",
}

DEFAULT_DRILL_DOWN = frozenset({"11", "06"})


def for_name(code: str, names: Mapping[str, str] | None = None) -> str:
    table = FOR_NAMES if names is None else names
    return table.get(code, code)


@dataclass(frozen=True)
class SelectedField:
    label: str
    kind: str
    source_codes: tuple[str, ...]
    parent: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise FortagError(f"unknown field kind {self.kind!r}")
        if not self.source_codes and self.kind != OTHER_BUCKET:
            raise FortagError(f"field {self.label!r} has no source codes")
        if self.kind == OTHER_BUCKET and not self.parent:
            raise FortagError(f"other-bucket {self.label!r} needs a parent code")


@dataclass(frozen=True)
class FieldScheme:
    """An ordered set of selected fields plus the rules that produced it."""

    fields: tuple[SelectedField, ...]
    drill_down_parents: frozenset[str] = DEFAULT_DRILL_DOWN
    threshold_2digit: float = 0.03
    threshold_4digit: float = 0.02

    def __post_init__(self) -> None:
        labels = [f.label for f in self.fields]
        if len(set(labels)) != len(labels):
            raise FortagError("field labels must be unique within a scheme")
        seen: dict[str, str] = {}
        for f in self.fields:
            if f.kind == OTHER_BUCKET:
                continue
            for code in f.source_codes:
                if code in seen:
                    raise FortagError(f"code {code} maps to both {seen[code]!r} and {f.label!r}")
                seen[code] = f.label
        for f in self.fields:
            if f.kind == OTHER_BUCKET and f.parent not in self.drill_down_parents:
                raise FortagError(f"other-bucket {f.label!r} has no drill-down parent")

    @property
    def labels(self) -> list[str]:
        return [f.label for f in self.fields]

    @cached_property
    def _lookup(self) -> tuple[dict[str, str], dict[str, str]]:
        direct: dict[str, str] = {}
        buckets: dict[str, str] = {}
        for f in self.fields:
            if f.kind == OTHER_BUCKET:
                buckets[f.parent] = f.label
            else:
                for code in f.source_codes:
                    direct[code] = f.label
        return direct, buckets

    def field_for_code(self, code: str) -> str | None:
        """Selected-field label for one raw FoR code, or None when it has no home."""
        direct, buckets = self._lookup
        if code in direct:
            return direct[code]
        if code == MULTIDISCIPLINARY:
            return None
        parent = code[:2]
        if parent in self.drill_down_parents:
            # 2-digit code of a drilled parent, or an unselected 4-digit child
            return buckets.get(parent)
        if len(code) == 4:
            return direct.get(parent)
        return None

    def to_json(self) -> dict:
        return {
            "thresholds": {"2digit": self.threshold_2digit, "4digit": self.threshold_4digit},
            "drill_down_parents": sorted(self.drill_down_parents),
            "fields": [
                {
                    "label": f.label,
                    "kind": f.kind,
                    "source_codes": list(f.source_codes),
                    **({"parent": f.parent} if f.parent else {}),
                }
                for f in self.fields
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> FieldScheme:
        try:
            return cls(
                fields=tuple(
                    SelectedField(
                        label=f["label"],
                        kind=f["kind"],
                        source_codes=tuple(f["source_codes"]),
                        parent=f.get("parent"),
                    )
                    for f in obj["fields"]
                ),
                drill_down_parents=frozenset(obj["drill_down_parents"]),
                threshold_2digit=float(obj["thresholds"]["2digit"]),
                threshold_4digit=float(obj["thresholds"]["4digit"]),
            )
        except (KeyError, TypeError) as err:
            raise FormatError(f"malformed field scheme: {err}") from err

    @classmethod
    def load(cls, path) -> FieldScheme:
        with open(path, encoding="utf-8") as fh:
            try:
                return cls.from_json(json.load(fh))
            except json.JSONDecodeError as err:
                raise FormatError(f"{path}: not a JSON scheme: {err}") from err

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())


def _level_codes(codes: ForCodeSet, level: str, parent: str | None) -> set[str]:
    out = set()
    for code in codes:
        if code == MULTIDISCIPLINARY:
            if parent is None:
                out.add(code)
        elif level == "2":
            out.add(code[:2])
        elif len(code) == 4 and (parent is None or code.startswith(parent)):
            out.add(code)
    return out


def compute_distribution(
    labeled: Sequence[LabeledRecord], level: str = "2", parent: str | None = None
) -> dict[str, float]:
    """Share of records carrying each FoR code.

    ``level="2"`` truncates codes to their 2-digit division. ``level="4"`` keeps
    4-digit codes, restricted to children of ``parent`` when one is given.
    ``MD`` is kept unless a parent filter applies. A record counts once per
    distinct code, so shares do not sum to 1.
    """
    if not labeled:
        raise FortagError("compute_distribution needs at least one record")
    if level not in ("2", "4"):
        raise FortagError(f"level must be '2' or '4', got {level!r}")
    if parent is not None and level != "4":
        raise FortagError("a parent filter only applies at the 4-digit level")
    counts: Counter = Counter()
    for lr in labeled:
        counts.update(_level_codes(lr.for_codes, level, parent))
    n = len(labeled)
    return {code: counts[code] / n for code in sorted(counts)}


def _order_key(share: float, kind: str, code: str):
    return (-round(share, 12), kind == OTHER_BUCKET, code)


def select_fields(
    dist2: Mapping[str, float],
    dist4_by_parent: Mapping[str, Mapping[str, float]],
    threshold_2digit: float = 0.03,
    threshold_4digit: float = 0.02,
    drill_down_parents: Sequence[str] | frozenset[str] = DEFAULT_DRILL_DOWN,
    names: Mapping[str, str] | None = None,
) -> FieldScheme:
    """Pick the classification fields.

    Thresholds are strict (a code needs a share *above* them). Fields come out
    in descending share; an other-bucket's share is the sum of its absorbed
    codes' shares (capped at the parent's share) and it sorts after a direct
    field of equal share.
    """
    if not dist2:
        raise FortagError("empty 2-digit distribution")
    parents = frozenset(drill_down_parents)
    missing = sorted(parents - set(dist2))
    if missing:
        raise FortagError(f"drill-down parents absent from distribution: {missing}")
    for p in parents:
        if not dist4_by_parent.get(p):
            raise FortagError(f"empty 4-digit distribution for drill-down parent {p}")

    ranked: list[tuple[tuple, SelectedField]] = []
    for code, share in dist2.items():
        if code in parents or share <= threshold_2digit:
            continue
        if code == MULTIDISCIPLINARY:
            f = SelectedField(for_name(code, names), MULTIDISCIPLINARY_KIND, (code,))
        else:
            f = SelectedField(for_name(code, names), DIRECT_2DIGIT, (code,))
        ranked.append((_order_key(share, f.kind, code), f))

    for parent in sorted(parents):
        absorbed: list[str] = []
        absorbed_share = 0.0
        for code, share in sorted(dist4_by_parent[parent].items()):
            if len(code) != 4 or not code.startswith(parent):
                continue
            # xx99 is the catch-all "other" child and always joins the bucket
            if share > threshold_4digit and not code.endswith("99"):
                f = SelectedField(for_name(code, names), DIRECT_4DIGIT, (code,))
                ranked.append((_order_key(share, f.kind, code), f))
            else:
                absorbed.append(code)
                absorbed_share += share
        bucket = SelectedField(
            "Other " + for_name(parent, names), OTHER_BUCKET, tuple(absorbed), parent=parent
        )
        share = min(absorbed_share, dist2[parent])
        ranked.append((_order_key(share, OTHER_BUCKET, parent), bucket))

    ranked.sort(key=lambda item: item[0])
    return FieldScheme(
        fields=tuple(f for _, f in ranked),
        drill_down_parents=parents,
        threshold_2digit=threshold_2digit,
        threshold_4digit=threshold_4digit,
    )


def build_scheme(
    labeled: Sequence[LabeledRecord],
    threshold_2digit: float = 0.03,
    threshold_4digit: float = 0.02,
    drill_down_parents: Sequence[str] | frozenset[str] = DEFAULT_DRILL_DOWN,
    names: Mapping[str, str] | None = None,
) -> FieldScheme:
    """Compute both distribution levels over ``labeled`` and select fields."""
    dist2 = compute_distribution(labeled, "2")
    dist4 = {p: compute_distribution(labeled, "4", parent=p) for p in drill_down_parents}
    return select_fields(dist2, dist4, threshold_2digit, threshold_4digit, drill_down_parents, names)


def assign_fields(codes: ForCodeSet | Sequence[str], scheme: FieldScheme) -> list[str]:
    """Map raw FoR codes onto selected-field labels, deduplicated in code order."""
    out: list[str] = []
    for code in codes:
        label = scheme.field_for_code(code)
        if label is not None and label not in out:
            out.append(label)
    return out


def field_coverage(labeled: Sequence[LabeledRecord], scheme: FieldScheme) -> dict[int, float]:
    """Share of records assigned 0, 1, 2 and 3 selected fields."""
    if not labeled:
        raise FortagError("field_coverage needs at least one record")
    counts = Counter(len(assign_fields(lr.for_codes, scheme)) for lr in labeled)
    return {k: counts.get(k, 0) / len(labeled) for k in range(4)}


def coverage_loss(labeled: Sequence[LabeledRecord], scheme: FieldScheme) -> float:
    """Share of records that carry FoR codes but receive no selected field."""
    if not labeled:
        raise FortagError("coverage_loss needs at least one record")
    lost = sum(1 for lr in labeled if len(lr.for_codes) and not assign_fields(lr.for_codes, scheme))
    return lost / len(labeled)
