"""Category bucketing, majority voting, and error-rate aggregation.

Per item and bucket, a (bucket, severity) flag reaches majority when at
least ``ceil((M+1)/2)`` of the M configured annotators produced a span of
that bucket and severity (2-of-3 by default).  When both severities reach
majority for the same bucket, only major is retained so an error is never
counted twice.  An item is CLEAN when a majority of annotators produced
no span at all.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Mapping, Sequence

from ..corpus import ItemKey
from ..errors import KeyMismatchError

logger = logging.getLogger(__name__)

BUCKET_ACCURACY = "A+M"
BUCKET_FLUENCY = "F"
BUCKET_OTHER = "O"
BUCKETS = (BUCKET_ACCURACY, BUCKET_FLUENCY, BUCKET_OTHER)
SEVERITIES = ("major", "minor")

PARSE_OK = "ok"
PARSE_REPAIRED = "repaired"
PARSE_FAILED = "failed"


def _default_table() -> dict[str, str]:
    text = resources.files("transaudit").joinpath("data/category_buckets.json").read_text("utf-8")
    return json.loads(text)


_DEFAULT_CATEGORY_TABLE: dict[str, str] | None = None


def default_category_table() -> dict[str, str]:
    global _DEFAULT_CATEGORY_TABLE
    if _DEFAULT_CATEGORY_TABLE is None:
        _DEFAULT_CATEGORY_TABLE = _default_table()
    return _DEFAULT_CATEGORY_TABLE


def load_category_table(path) -> dict[str, str]:
    """Load a replacement category -> bucket table from JSON."""
    with open(path, "r", encoding="utf-8") as handle:
        table = json.load(handle)
    for category, bucket in table.items():
        if bucket not in BUCKETS:
            raise ValueError(f"category {category!r} maps to unknown bucket {bucket!r}")
    return {str(k).lower(): str(v) for k, v in table.items()}


def map_category(category: str, table: Mapping[str, str] | None = None) -> str:
    """Bucket for one error-category label.

    Matches the full lowercased label first, then its leading path segment
    ("accuracy/mistranslation" matches "accuracy").  Unknown labels fall
    into the catch-all bucket with a logged warning rather than failing a
    run.
    """
    table = table if table is not None else default_category_table()
    normalized = category.strip().lower()
    if normalized in table:
        return table[normalized]
    head = normalized.split("/", 1)[0].strip()
    if head in table:
        return table[head]
    logger.warning("unknown error category %r bucketed as %s", category, BUCKET_OTHER)
    return BUCKET_OTHER


@dataclass(frozen=True)
class ErrorSpan:
    span_text: str
    mqm_category: str
    severity: str


@dataclass
class ItemAnnotation:
    key: ItemKey
    annotator_id: str
    spans: tuple[ErrorSpan, ...]
    raw_response: str
    parse_status: str = PARSE_OK

    def to_dict(self) -> dict:
        return {
            **self.key.to_dict(),
            "annotator_id": self.annotator_id,
            "spans": [
                {"span": s.span_text, "category": s.mqm_category, "severity": s.severity}
                for s in self.spans
            ],
            "raw_response": self.raw_response,
            "parse_status": self.parse_status,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ItemAnnotation":
        return cls(
            key=ItemKey.from_dict(obj),
            annotator_id=str(obj["annotator_id"]),
            spans=tuple(
                ErrorSpan(str(s["span"]), str(s["category"]), str(s["severity"]))
                for s in obj.get("spans", [])
            ),
            raw_response=str(obj.get("raw_response", "")),
            parse_status=str(obj.get("parse_status", PARSE_OK)),
        )


@dataclass
class MajorityVerdict:
    """Aggregated 3-annotator decision for one item.

    ``major``/``minor`` hold the per-bucket flags after severity
    precedence; ``present`` collapses severities (either one reaching
    majority marks the bucket).  ``excluded`` marks items where too few
    annotators produced usable output to ever reach the threshold.
    """

    key: ItemKey
    major: dict[str, int]
    minor: dict[str, int]
    present: dict[str, int]
    clean: int
    n_valid: int
    excluded: bool

    def to_dict(self) -> dict:
        return {
            **self.key.to_dict(),
            "major": self.major,
            "minor": self.minor,
            "present": self.present,
            "clean": self.clean,
            "n_valid": self.n_valid,
            "excluded": self.excluded,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "MajorityVerdict":
        return cls(
            key=ItemKey.from_dict(obj),
            major={b: int(v) for b, v in obj["major"].items()},
            minor={b: int(v) for b, v in obj["minor"].items()},
            present={b: int(v) for b, v in obj["present"].items()},
            clean=int(obj["clean"]),
            n_valid=int(obj["n_valid"]),
            excluded=bool(obj["excluded"]),
        )


def majority_vote(
    annotations: Sequence[ItemAnnotation],
    pool_size: int | None = None,
    category_table: Mapping[str, str] | None = None,
) -> MajorityVerdict:
    """Threshold vote over per-annotator (bucket, severity) flags.

    Failed-parse annotators abstain: the threshold stays at
    ``ceil((M+1)/2)`` of the configured pool size, so one abstention
    demands unanimity of the remaining two and two abstentions exclude
    the item.
    """
    if not annotations:
        raise KeyMismatchError("no annotations to vote on")
    keys = {a.key for a in annotations}
    if len(keys) != 1:
        raise KeyMismatchError(f"annotations mix items: {sorted(k.id for k in keys)}")
    key = annotations[0].key
    m = pool_size if pool_size is not None else len(annotations)
    threshold = (m + 2) // 2  # ceil((m + 1) / 2)

    valid = [a for a in annotations if a.parse_status != PARSE_FAILED]
    flag_counts: dict[tuple[str, str], int] = {}
    spanless = 0
    for annotation in valid:
        if not annotation.spans:
            spanless += 1
            continue
        seen: set[tuple[str, str]] = set()
        for span in annotation.spans:
            bucket = map_category(span.mqm_category, category_table)
            severity = span.severity.lower()
            if severity not in SEVERITIES:
                continue
            seen.add((bucket, severity))
        for flag in seen:
            flag_counts[flag] = flag_counts.get(flag, 0) + 1

    major: dict[str, int] = {}
    minor: dict[str, int] = {}
    present: dict[str, int] = {}
    for bucket in BUCKETS:
        maj_major = 1 if flag_counts.get((bucket, "major"), 0) >= threshold else 0
        maj_minor = 1 if flag_counts.get((bucket, "minor"), 0) >= threshold else 0
        present[bucket] = 1 if (maj_major or maj_minor) else 0
        if maj_major and maj_minor:
            maj_minor = 0  # keep major only; never double count a bucket
        major[bucket] = maj_major
        minor[bucket] = maj_minor

    return MajorityVerdict(
        key=key,
        major=major,
        minor=minor,
        present=present,
        clean=1 if spanless >= threshold else 0,
        n_valid=len(valid),
        excluded=len(valid) < threshold,
    )


def collapse_severity(verdict: MajorityVerdict) -> dict[str, int]:
    """Severity-collapsed per-bucket presence bits for overview figures."""
    return dict(verdict.present)


@dataclass
class CellRates:
    language: str
    dataset: str
    n: int
    excluded: int
    rates: dict[str, float] = field(default_factory=dict)  # bucket + "CLEAN" -> per 1000


@dataclass
class ShareEntry:
    dataset: str
    bucket: str
    major_count: int
    minor_count: int

    @property
    def major_share(self) -> float | None:
        total = self.major_count + self.minor_count
        return None if total == 0 else 100.0 * self.major_count / total

    @property
    def minor_share(self) -> float | None:
        total = self.major_count + self.minor_count
        return None if total == 0 else 100.0 * self.minor_count / total


@dataclass
class ErrorRates:
    cells: list[CellRates]
    shares: list[ShareEntry]
    total_excluded: int

    def cell(self, language: str, dataset: str) -> CellRates | None:
        for cell in self.cells:
            if cell.language == language and cell.dataset == dataset:
                return cell
        return None

    def share(self, dataset: str, bucket: str) -> ShareEntry | None:
        for entry in self.shares:
            if entry.dataset == dataset and entry.bucket == bucket:
                return entry
        return None


def error_rates(verdicts: Iterable[MajorityVerdict]) -> ErrorRates:
    """Per-1,000 rates by (language, dataset) and pooled severity shares.

    Excluded verdicts are tallied but never counted in a denominator;
    cells whose verdicts were all excluded report no rates.  Severity
    shares pool the post-precedence flags across languages per dataset.
    """
    groups: dict[tuple[str, str], list[MajorityVerdict]] = {}
    for verdict in verdicts:
        groups.setdefault((verdict.key.language, verdict.key.dataset), []).append(verdict)

    cells: list[CellRates] = []
    share_counts: dict[tuple[str, str], list[int]] = {}
    total_excluded = 0
    for (language, dataset) in sorted(groups):
        members = groups[(language, dataset)]
        counted = [v for v in members if not v.excluded]
        excluded = len(members) - len(counted)
        total_excluded += excluded
        cell = CellRates(language=language, dataset=dataset, n=len(counted), excluded=excluded)
        if counted:
            n = len(counted)
            for bucket in BUCKETS:
                flagged = sum(v.present[bucket] for v in counted)
                cell.rates[bucket] = 1000.0 * flagged / n
            cell.rates["CLEAN"] = 1000.0 * sum(v.clean for v in counted) / n
        cells.append(cell)
        for verdict in counted:
            for bucket in BUCKETS:
                counts = share_counts.setdefault((dataset, bucket), [0, 0])
                counts[0] += verdict.major[bucket]
                counts[1] += verdict.minor[bucket]

    shares = [
        ShareEntry(dataset=dataset, bucket=bucket, major_count=c[0], minor_count=c[1])
        for (dataset, bucket), c in sorted(share_counts.items())
    ]
    return ErrorRates(cells=cells, shares=shares, total_excluded=total_excluded)
