"""Structural integrity audit of translated benchmark corpora.

Four checks run per corpus suite:

* answer-index alignment of multiple-choice items against the English
  originals,
* essential-field completeness (question; choices for multiple choice;
  answer for generative tasks),
* split/subset placement consistency with the English originals,
* cross-language coverage of every item over the configured target
  languages.

Counts are reported per (dataset, split): ``n_en`` English samples,
``n_t`` non-English samples present, ``n_c`` non-English samples with
missing content, ``n_l`` non-English samples whose counterpart is missing
in some target language (computed after excluding items that violate the
completeness or placement checks, so nothing is double counted).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .corpus import (
    Corpus,
    ItemKey,
    completeness_violations,
    defective_fields,
    schema_for,
)
from .errors import DomainError, SchemaMismatchError

ROSTER_PREVIEW_LIMIT = 100


@dataclass(frozen=True)
class LeakageParams:
    """Few-shot context pool drawn from inside the evaluated split."""

    context_pool_size: int
    eval_split_size: int
    shots: int
    true_accuracy: float


def estimate_leakage_inflation(params: LeakageParams) -> float:
    """Upper bound, in percentage points, of accuracy inflation caused by an
    evaluated item appearing in its own few-shot context.

    The per-item leak probability under a uniformly sampled context pool is
    ``shots / eval_split_size``; a leak can only flip an answer the model
    would otherwise get wrong, so the bound scales with ``1 - true_accuracy``.
    Linear in ``shots`` and in ``(1 - true_accuracy)``.
    """
    if params.context_pool_size <= 0:
        raise DomainError("context_pool_size must be positive")
    if not (0 <= params.shots <= params.context_pool_size <= params.eval_split_size):
        raise DomainError(
            "expected 0 <= shots <= context_pool_size <= eval_split_size, got "
            f"shots={params.shots}, pool={params.context_pool_size}, "
            f"eval={params.eval_split_size}"
        )
    if not (0.0 <= params.true_accuracy <= 1.0):
        raise DomainError(f"true_accuracy must be in [0, 1], got {params.true_accuracy}")
    leak_probability = params.shots / params.eval_split_size
    return 100.0 * leak_probability * (1.0 - params.true_accuracy)


def _index_set(value: int | list[int] | None) -> frozenset[int] | None:
    if value is None:
        return None
    if isinstance(value, list):
        return frozenset(value)
    return frozenset((value,))


def check_answer_alignment(
    target: Corpus, english: Corpus
) -> tuple[list[ItemKey], list[ItemKey]]:
    """Multiple-choice answer indices of ``target`` compared against the
    English originals, matched on (dataset, subset, split, id).

    Returns ``(misaligned, unmatched)``: keys whose normalized index set
    differs from the English item's, and keys with no English counterpart.
    Index lists are compared order-insensitively.
    """
    non_english = [k.language for k in (i.key for i in english) if k.language != "en"]
    if non_english:
        raise SchemaMismatchError(
            f"english corpus contains non-English items (languages {sorted(set(non_english))})"
        )
    by_base = {item.key.base(): item for item in english}
    misaligned: list[ItemKey] = []
    unmatched: list[ItemKey] = []
    for item in target:
        if item.key.language == "en":
            continue
        if schema_for(item.key.dataset).kind != "multiple_choice":
            continue
        source = by_base.get(item.key.base())
        if source is None:
            unmatched.append(item.key)
            continue
        if _index_set(item.answer_index) != _index_set(source.answer_index):
            misaligned.append(item.key)
    return misaligned, unmatched


def check_field_completeness(corpus: Corpus) -> list[ItemKey]:
    """Non-English items whose essential fields are empty or absent."""
    return [
        item.key
        for item in corpus
        if item.key.language != "en" and completeness_violations(item)
    ]


def check_split_consistency(target: Corpus, english: Corpus) -> list[ItemKey]:
    """Non-English items whose id exists in English only under a different
    (split, subset) placement."""
    placements: dict[tuple[str, str], set[tuple[str, str | None]]] = {}
    for item in english:
        placements.setdefault((item.key.dataset, item.key.id), set()).add(
            (item.key.split, item.key.subset)
        )
    roster: list[ItemKey] = []
    for item in target:
        if item.key.language == "en":
            continue
        known = placements.get((item.key.dataset, item.key.id))
        if known is None:
            continue
        if (item.key.split, item.key.subset) not in known:
            roster.append(item.key)
    return roster


def check_cross_language_coverage(
    corpora: Mapping[str, Corpus],
    exclusions: Iterable[ItemKey] = (),
    languages: Iterable[str] | None = None,
) -> list[ItemKey]:
    """Non-English items whose (dataset, subset, split, id) is absent from
    some configured target language.

    ``exclusions`` (items violating the other checks) are removed from the
    checked set only; language presence is decided by raw corpus
    membership, so an excluded copy never manufactures a gap elsewhere.
    """
    expected = tuple(sorted(languages)) if languages is not None else tuple(sorted(corpora))
    excluded = set(exclusions)
    present: dict[tuple[str, str | None, str, str], set[str]] = {}
    for language, corpus in corpora.items():
        for item in corpus:
            present.setdefault(item.key.base(), set()).add(item.key.language)
    roster: list[ItemKey] = []
    for language in sorted(corpora):
        for item in corpora[language]:
            if item.key.language == "en" or item.key in excluded:
                continue
            covering = present.get(item.key.base(), set())
            if any(lang not in covering for lang in expected):
                roster.append(item.key)
    return roster


@dataclass
class CellAudit:
    """Violation counts and rosters for one (dataset, split) cell."""

    dataset: str
    split: str
    n_en: int = 0
    n_t: int = 0
    n_c: int = 0
    n_l: int = 0
    criterion_a_ok: bool = True
    answer_misaligned: list[ItemKey] = field(default_factory=list)
    missing_content: list[ItemKey] = field(default_factory=list)
    split_inconsistent: list[ItemKey] = field(default_factory=list)
    coverage_gaps: list[ItemKey] = field(default_factory=list)
    english_unmatched: list[ItemKey] = field(default_factory=list)
    #: English originals whose content defects hit two or more target languages
    content_gap_multi_language: int = 0

    @property
    def clean(self) -> bool:
        return (
            self.criterion_a_ok
            and not self.missing_content
            and not self.split_inconsistent
            and not self.coverage_gaps
        )


@dataclass
class AuditReport:
    languages: tuple[str, ...]
    cells: list[CellAudit]
    #: per-item repairable field paths for every content-defective item
    defects: dict[ItemKey, tuple[str, ...]] = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return all(cell.clean for cell in self.cells)

    def cell(self, dataset: str, split: str) -> CellAudit | None:
        for cell in self.cells:
            if cell.dataset == dataset and cell.split == split:
                return cell
        return None

    def violation_count(self) -> int:
        return sum(
            len(c.answer_misaligned)
            + len(c.missing_content)
            + len(c.split_inconsistent)
            + len(c.coverage_gaps)
            for c in self.cells
        )


def audit(
    targets: Mapping[str, Corpus],
    english: Corpus,
    languages: Iterable[str] | None = None,
) -> AuditReport:
    """Run all four structural checks and aggregate per (dataset, split).

    ``targets`` maps each target-language code to its corpus; ``languages``
    fixes the expected coverage list (defaults to the keys of ``targets``).
    Deterministic: output depends only on the inputs.
    """
    expected = tuple(sorted(languages)) if languages is not None else tuple(sorted(targets))

    misaligned: list[ItemKey] = []
    unmatched: list[ItemKey] = []
    content: list[ItemKey] = []
    crossed: list[ItemKey] = []
    defects: dict[ItemKey, tuple[str, ...]] = {}

    for language in sorted(targets):
        corpus = targets[language]
        lang_misaligned, lang_unmatched = check_answer_alignment(corpus, english)
        misaligned.extend(lang_misaligned)
        unmatched.extend(lang_unmatched)
        content.extend(check_field_completeness(corpus))
        crossed.extend(check_split_consistency(corpus, english))
        for item in corpus:
            if item.key.language != "en" and completeness_violations(item):
                defects[item.key] = defective_fields(item)

    exclusions = set(content) | set(crossed)
    gaps = check_cross_language_coverage(targets, exclusions, expected)

    cells: dict[tuple[str, str], CellAudit] = {}

    def cell_for(key: ItemKey) -> CellAudit:
        ident = (key.dataset, key.split)
        if ident not in cells:
            cells[ident] = CellAudit(dataset=key.dataset, split=key.split)
        return cells[ident]

    for item in english:
        cell_for(item.key).n_en += 1
    for language in sorted(targets):
        for item in targets[language]:
            if item.key.language != "en":
                cell_for(item.key).n_t += 1
    for key in misaligned:
        cell = cell_for(key)
        cell.answer_misaligned.append(key)
        cell.criterion_a_ok = False
    for key in unmatched:
        cell_for(key).english_unmatched.append(key)
    for key in content:
        cell = cell_for(key)
        cell.missing_content.append(key)
        cell.n_c += 1
    for key in crossed:
        cell_for(key).split_inconsistent.append(key)
    for key in gaps:
        cell = cell_for(key)
        cell.coverage_gaps.append(key)
        cell.n_l += 1

    # English originals whose content defects span two or more target languages
    affected: dict[tuple[str, str | None, str, str], set[str]] = {}
    for key in content:
        affected.setdefault(key.base(), set()).add(key.language)
    for base, langs in affected.items():
        if len(langs) >= 2:
            dataset, _subset, split, _id = base
            cell = cells.get((dataset, split))
            if cell is not None:
                cell.content_gap_multi_language += 1

    ordered = [cells[ident] for ident in sorted(cells)]
    for cell in ordered:
        cell.answer_misaligned.sort(key=ItemKey.sort_key)
        cell.missing_content.sort(key=ItemKey.sort_key)
        cell.split_inconsistent.sort(key=ItemKey.sort_key)
        cell.coverage_gaps.sort(key=ItemKey.sort_key)
        cell.english_unmatched.sort(key=ItemKey.sort_key)
    return AuditReport(languages=expected, cells=ordered, defects=defects)


def report_to_dict(report: AuditReport) -> dict:
    """JSON-ready report with complete rosters."""
    return {
        "languages": list(report.languages),
        "clean": report.clean,
        "violations": report.violation_count(),
        "cells": [
            {
                "dataset": cell.dataset,
                "split": cell.split,
                "n_en": cell.n_en,
                "n_t": cell.n_t,
                "n_c": cell.n_c,
                "n_l": cell.n_l,
                "criterion_a_ok": cell.criterion_a_ok,
                "content_gap_multi_language": cell.content_gap_multi_language,
                "rosters": {
                    "answer_misaligned": [k.to_dict() for k in cell.answer_misaligned],
                    "missing_content": [
                        {**k.to_dict(), "fields": list(report.defects.get(k, ()))}
                        for k in cell.missing_content
                    ],
                    "split_inconsistent": [k.to_dict() for k in cell.split_inconsistent],
                    "coverage_gaps": [k.to_dict() for k in cell.coverage_gaps],
                    "english_unmatched": [k.to_dict() for k in cell.english_unmatched],
                },
            }
            for cell in report.cells
        ],
    }


def report_to_json(report: AuditReport) -> str:
    return json.dumps(report_to_dict(report), ensure_ascii=False, indent=2) + "\n"


def summary_table(report: AuditReport) -> str:
    """Plain-text violation summary, one row per (dataset, split).

    Rosters are previewed up to :data:`ROSTER_PREVIEW_LIMIT` keys; the JSON
    artifact carries them in full.
    """
    header = f"{'Dataset':<12}{'Split':<12}{'N_en':>10}{'N_T':>10}{'N_C':>8}{'N_L':>8}  A-OK"
    lines = [header, "-" * len(header)]
    for cell in report.cells:
        lines.append(
            f"{cell.dataset:<12}{cell.split:<12}{cell.n_en:>10,}{cell.n_t:>10,}"
            f"{cell.n_c:>8,}{cell.n_l:>8,}  {'yes' if cell.criterion_a_ok else 'NO'}"
        )
    preview: list[str] = []
    for cell in report.cells:
        for label, roster in (
            ("answer_misaligned", cell.answer_misaligned),
            ("missing_content", cell.missing_content),
            ("split_inconsistent", cell.split_inconsistent),
            ("coverage_gaps", cell.coverage_gaps),
        ):
            if roster:
                shown = roster[:ROSTER_PREVIEW_LIMIT]
                keys = ", ".join(f"{k.language}:{k.id}" for k in shown)
                suffix = "" if len(roster) <= ROSTER_PREVIEW_LIMIT else f" … ({len(roster)} total)"
                preview.append(f"{cell.dataset}/{cell.split} {label}: {keys}{suffix}")
    if preview:
        lines.append("")
        lines.extend(preview)
    return "\n".join(lines) + "\n"
