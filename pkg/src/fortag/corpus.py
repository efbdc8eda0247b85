"""Publication records, the ERA journal list, and the ISSN join between them.

Publications arrive as line-delimited JSON (one object per record). The journal
list is a CSV with ``journal_title,issn_1,issn_2,for_1,for_2,for_3`` columns.
Joining the two on ISSN transfers each journal's Fields-of-Research codes to
every article it published.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence, TextIO

from fortag.errors import FortagError, FormatError

if TYPE_CHECKING:
    from fortag.fields import FieldScheme

logger = logging.getLogger(__name__)

_ISSN_RE = re.compile(r"^\d{7}[\dX]$")
_FOR_RE = re.compile(r"^(\d{2}|\d{4}|MD)$")

MULTIDISCIPLINARY = "MD"


def canonical_issn(raw: str) -> str:
    """Return ``raw`` in ``NNNN-NNNC`` form.

    Hyphens and whitespace are stripped and a trailing ``x`` is uppercased.
    Raises :class:`FormatError` when fewer or more than 8 characters remain or
    the characters are not digits (with an optional final ``X``).
    """
    compact = re.sub(r"[\s\-]", "", raw).upper()
    if not _ISSN_RE.match(compact):
        raise FormatError(f"invalid ISSN {raw!r}")
    return f"{compact[:4]}-{compact[4:]}"


@dataclass(frozen=True)
class PublicationRecord:
    pmid: str
    issn: str | None = None
    journal_title: str | None = None
    title: str | None = None
    abstract: str | None = None
    keywords: tuple[str, ...] = ()
    mesh_terms: tuple[str, ...] = ()
    year: int | None = None

    def __post_init__(self) -> None:
        if not self.pmid:
            raise FortagError("pmid must be non-empty")
        if self.issn is not None and canonical_issn(self.issn) != self.issn:
            raise FormatError(f"ISSN {self.issn!r} is not canonical")
        if any(not k for k in self.keywords) or any(not m for m in self.mesh_terms):
            raise FortagError(f"record {self.pmid}: empty keyword or MeSH term")

    def to_json(self) -> dict:
        """Serialize to the publications-file schema, omitting absent fields."""
        out: dict = {"pmid": self.pmid}
        for key in ("issn", "journal_title", "title", "abstract"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.keywords:
            out["keywords"] = list(self.keywords)
        if self.mesh_terms:
            out["mesh_terms"] = list(self.mesh_terms)
        if self.year is not None:
            out["year"] = self.year
        return out


@dataclass(frozen=True)
class ForCodeSet:
    """Up to three FoR codes (2- or 4-digit) or the ``MD`` marker."""

    codes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.codes) > 3:
            raise FortagError(f"at most 3 FoR codes allowed, got {list(self.codes)}")
        if len(set(self.codes)) != len(self.codes):
            raise FortagError(f"duplicate FoR codes in {list(self.codes)}")
        for code in self.codes:
            if not _FOR_RE.match(code):
                raise FormatError(f"invalid FoR code {code!r}")

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[str]:
        return iter(self.codes)


@dataclass(frozen=True)
class JournalEntry:
    issns: tuple[str, ...]
    journal_title: str
    for_codes: ForCodeSet = field(default_factory=ForCodeSet)

    def __post_init__(self) -> None:
        if not self.issns:
            raise FortagError(f"journal {self.journal_title!r} has no ISSN")
        for issn in self.issns:
            if canonical_issn(issn) != issn:
                raise FormatError(f"ISSN {issn!r} is not canonical")


@dataclass(frozen=True)
class LabeledRecord:
    record: PublicationRecord
    for_codes: ForCodeSet = field(default_factory=ForCodeSet)

    def to_json(self) -> dict:
        out = self.record.to_json()
        out["for_codes"] = list(self.for_codes.codes)
        return out


def _string_list(value, key: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"{key} must be an array of strings")
    return tuple(v.strip() for v in value if v.strip())


def _optional_str(value, key: str) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise ValueError(f"{key} must be a string")
    value = value.strip()
    return value or None


def record_from_json(obj: dict) -> PublicationRecord:
    """Build a record from one decoded publications-file object."""
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    pmid = obj.get("pmid")
    if not isinstance(pmid, str) or not pmid.strip():
        raise ValueError("pmid must be a non-empty string")
    issn = _optional_str(obj.get("issn"), "issn")
    year = obj.get("year")
    if year is not None and (not isinstance(year, int) or isinstance(year, bool)):
        raise ValueError("year must be an integer")
    return PublicationRecord(
        pmid=pmid.strip(),
        issn=canonical_issn(issn) if issn else None,
        journal_title=_optional_str(obj.get("journal_title"), "journal_title"),
        title=_optional_str(obj.get("title"), "title"),
        abstract=_optional_str(obj.get("abstract"), "abstract"),
        keywords=_string_list(obj.get("keywords"), "keywords"),
        mesh_terms=_string_list(obj.get("mesh_terms"), "mesh_terms"),
        year=year,
    )


def parse_publications(source: Iterable[str]) -> list[PublicationRecord]:
    """Parse a line-delimited JSON stream of publication records.

    Blank lines are skipped. Raises :class:`FormatError` naming the 1-based
    line number of a malformed line, or both line numbers of a repeated pmid.
    """
    records: list[PublicationRecord] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            record = record_from_json(json.loads(line))
        except (ValueError, FortagError) as err:
            raise FormatError(f"line {lineno}: malformed record: {err}") from err
        if record.pmid in seen:
            raise FormatError(
                f"duplicate pmid {record.pmid!r} on lines {seen[record.pmid]} and {lineno}"
            )
        seen[record.pmid] = lineno
        records.append(record)
    return records


def write_publications(records: Iterable[PublicationRecord | LabeledRecord], out: TextIO) -> None:
    for rec in records:
        out.write(json.dumps(rec.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def parse_labeled(source: Iterable[str]) -> list[LabeledRecord]:
    """Parse records written by :func:`write_publications` from labeled input."""
    out = []
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            codes = obj.get("for_codes", [])
            out.append(LabeledRecord(record_from_json(obj), ForCodeSet(tuple(codes))))
        except (ValueError, FortagError) as err:
            raise FormatError(f"line {lineno}: malformed labeled record: {err}") from err
    return out


def parse_journal_list(source: Iterable[str]) -> list[JournalEntry]:
    """Parse the journal list CSV into entries.

    Any column named ``issn_*`` holds an ISSN and any ``for_*`` column a FoR
    code. Invalid ISSN cells are ignored; rows left without a valid ISSN are
    dropped and counted in a logged warning. A FoR cell that is not a 2-digit
    code, 4-digit code or ``MD`` raises :class:`FormatError` naming its line.
    """
    reader = csv.DictReader(source)
    if reader.fieldnames is None or "journal_title" not in reader.fieldnames:
        raise FormatError("journal list must have a journal_title column")
    issn_cols = [c for c in reader.fieldnames if c.startswith("issn_")]
    for_cols = [c for c in reader.fieldnames if c.startswith("for_")]

    entries: list[JournalEntry] = []
    dropped = 0
    for row in reader:
        lineno = reader.line_num
        codes: list[str] = []
        for col in for_cols:
            cell = (row.get(col) or "").strip()
            if not cell:
                continue
            if not _FOR_RE.match(cell):
                raise FormatError(f"line {lineno}: invalid FoR code {cell!r} in column {col}")
            if cell not in codes:
                codes.append(cell)
        if len(codes) > 3:
            raise FormatError(f"line {lineno}: more than 3 FoR codes")

        issns: list[str] = []
        for col in issn_cols:
            cell = (row.get(col) or "").strip()
            if not cell:
                continue
            try:
                issn = canonical_issn(cell)
            except FormatError:
                continue
            if issn not in issns:
                issns.append(issn)
        if not issns:
            dropped += 1
            continue
        entries.append(
            JournalEntry(
                issns=tuple(issns),
                journal_title=(row.get("journal_title") or "").strip(),
                for_codes=ForCodeSet(tuple(codes)),
            )
        )
    if dropped:
        logger.warning("dropped %d journal rows without a valid ISSN", dropped)
    return entries


def build_issn_index(journals: Sequence[JournalEntry]) -> dict[str, ForCodeSet]:
    index: dict[str, ForCodeSet] = {}
    conflicts: set[str] = set()
    for entry in journals:
        for issn in entry.issns:
            known = index.get(issn)
            if known is not None and known != entry.for_codes:
                conflicts.add(issn)
            index.setdefault(issn, entry.for_codes)
    if conflicts:
        raise FortagError(
            "conflicting FoR codes for ISSN(s) in journal list: " + ", ".join(sorted(conflicts))
        )
    return index


def match_for_codes(
    records: Sequence[PublicationRecord], journals: Sequence[JournalEntry]
) -> list[LabeledRecord]:
    """Label every record with the FoR codes of its journal, in input order.

    Records without an ISSN, or whose ISSN is not in the journal list, get an
    empty code set.
    """
    index = build_issn_index(journals)
    empty = ForCodeSet()
    return [
        LabeledRecord(rec, index.get(rec.issn, empty) if rec.issn else empty) for rec in records
    ]


def _shares(counts: Counter, keys: Sequence, total: int) -> dict:
    return {k: counts.get(k, 0) / total for k in keys}


def for_match_stats(labeled: Sequence[LabeledRecord]) -> dict[int, float]:
    """Share of records matched to 0, 1, 2 and 3 FoR codes."""
    if not labeled:
        raise FortagError("for_match_stats needs at least one record")
    counts = Counter(len(lr.for_codes) for lr in labeled)
    return _shares(counts, range(4), len(labeled))


AVAILABILITY_KEYS = ("abstract", "keywords", "mesh", "at_least_1", "at_least_2", "all_3")


@dataclass
class AvailabilityReport:
    """Metadata availability shares, overall and per selected field.

    ``overall`` and each ``per_field`` value map the keys of
    :data:`AVAILABILITY_KEYS` to shares. ``present_counts`` is the exhaustive
    partition of records by how many of abstract/keywords/MeSH they carry.
    """

    total: int
    overall: dict[str, float]
    present_counts: dict[int, float]
    per_field: dict[str, dict[str, float]] = field(default_factory=dict)
    per_field_support: dict[str, int] = field(default_factory=dict)


def _availability(records: Sequence[PublicationRecord]) -> tuple[dict[str, float], dict[int, float]]:
    n = len(records)
    abstract = keywords = mesh = 0
    present = Counter()
    for rec in records:
        a, k, m = bool(rec.abstract), bool(rec.keywords), bool(rec.mesh_terms)
        abstract += a
        keywords += k
        mesh += m
        present[a + k + m] += 1
    overall = {
        "abstract": abstract / n,
        "keywords": keywords / n,
        "mesh": mesh / n,
        "at_least_1": (present[1] + present[2] + present[3]) / n,
        "at_least_2": (present[2] + present[3]) / n,
        "all_3": present[3] / n,
    }
    return overall, _shares(present, range(4), n)


def metadata_availability(
    records: Sequence[PublicationRecord | LabeledRecord],
    scheme: FieldScheme | None = None,
) -> AvailabilityReport:
    """Compute which share of records carry abstract, keywords and MeSH terms.

    When ``scheme`` is given the records must be :class:`LabeledRecord` and the
    report is broken down per selected field (a record counts for every field
    it is assigned).
    """
    if not records:
        raise FortagError("metadata_availability needs at least one record")
    plain = [r.record if isinstance(r, LabeledRecord) else r for r in records]
    overall, present = _availability(plain)
    report = AvailabilityReport(total=len(plain), overall=overall, present_counts=present)
    if scheme is None:
        return report

    from fortag.fields import assign_fields

    by_field: dict[str, list[PublicationRecord]] = {f.label: [] for f in scheme.fields}
    for r in records:
        if not isinstance(r, LabeledRecord):
            raise FortagError("per-field availability needs labeled records")
        for label in assign_fields(r.for_codes, scheme):
            by_field[label].append(r.record)
    for label, recs in by_field.items():
        report.per_field_support[label] = len(recs)
        if recs:
            report.per_field[label] = _availability(recs)[0]
    return report


def write_share_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write a CSV table; floats are formatted with 4 fractional digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.4f}" if isinstance(v, float) else v for v in row])
