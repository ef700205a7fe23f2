"""Manifest resolution, batched translation, and atomic write-back.

The flow is: resolve manifest entries against the loaded corpora, extract
source-language fragments from each item's English counterpart, consult
the cache, send the misses to the engine in size-capped requests, then
overwrite exactly the flagged fields.  Every field overwrite produces one
diagnostics record; failed or ambiguous items land in a manual-inspection
queue and their corpus entries stay byte-identical.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..corpus import (
    BenchmarkItem,
    Corpus,
    ItemKey,
    schema_for,
    validate_item,
)
from ..errors import (
    ConfigError,
    FragmentCountMismatchError,
    LineageError,
    MalformedLineError,
    UnescapeError,
    WriteConflictError,
)
from .cache import TranslationCache
from .engines import TranslationEngine
from .fragments import (
    FieldSlot,
    FragmentPlan,
    _expand_fields,
    deserialize_fragments,
    extract_fragments,
    reformat_continuation_options,
    serialize_fragments,
    strip_translated_prefix,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_PAYLOAD_BYTES = 100 * 1024

STATUS_UPDATED = "updated"
STATUS_UNCHANGED = "unchanged"
STATUS_FAILED = "failed"
STATUS_MANUAL_QUEUE = "manual_queue"


@dataclass(frozen=True)
class RepairEntry:
    language: str
    dataset: str
    subset: str | None
    split: str
    id: str | None  # None selects the whole (language, dataset, subset, split)
    fields: tuple[str, ...] | None  # None -> defective fields per audit / all translatable

    def key(self) -> ItemKey | None:
        if self.id is None:
            return None
        return ItemKey(self.language, self.dataset, self.subset, self.split, self.id)


@dataclass(frozen=True)
class RepairManifest:
    entries: tuple[RepairEntry, ...]

    @property
    def scope_mode(self) -> str:
        return "full_split" if any(e.id is None for e in self.entries) else "manifest"


def load_manifest(path: str | Path) -> RepairManifest:
    """Parse a JSONL manifest of repair entries."""
    entries: list[RepairEntry] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(line_no, exc.msg) from exc
            for required in ("language", "dataset", "split"):
                if required not in obj:
                    raise MalformedLineError(line_no, f"manifest entry missing {required!r}")
            fields = obj.get("fields")
            entries.append(
                RepairEntry(
                    language=str(obj["language"]),
                    dataset=str(obj["dataset"]),
                    subset=None if obj.get("subset") in (None, "") else str(obj["subset"]),
                    split=str(obj["split"]),
                    id=None if obj.get("id") in (None, "") else str(obj["id"]),
                    fields=None if fields is None else tuple(str(f) for f in fields),
                )
            )
    return RepairManifest(entries=tuple(entries))


@dataclass(frozen=True)
class RepairJob:
    key: ItemKey
    fields: tuple[str, ...]


def resolve_manifest(
    manifest: RepairManifest,
    corpora: Mapping[str, Corpus],
    defects: Mapping[ItemKey, tuple[str, ...]] | None = None,
) -> tuple[list[RepairJob], list[tuple[RepairEntry, str]]]:
    """Expand manifest entries into per-item jobs.

    Entries that cannot be resolved are returned with a reason instead of
    raising, so callers can refuse to start before any engine traffic.
    Overlapping field targets across entries raise
    :class:`WriteConflictError`.
    """
    jobs: list[RepairJob] = []
    unresolved: list[tuple[RepairEntry, str]] = []
    claimed: dict[tuple[ItemKey, FieldSlot], RepairEntry] = {}

    def claim(entry: RepairEntry, key: ItemKey, item: BenchmarkItem, fields: tuple[str, ...]):
        for slot in _expand_fields(fields, item):
            previous = claimed.get((key, slot))
            if previous is not None and previous != entry:
                raise WriteConflictError(f"entries overlap on {key} field {slot}")
            claimed[(key, slot)] = entry

    for entry in manifest.entries:
        corpus = corpora.get(entry.language)
        if corpus is None:
            unresolved.append((entry, f"no corpus loaded for language {entry.language!r}"))
            continue
        if entry.id is not None:
            key = entry.key()
            assert key is not None
            item = corpus.lookup(key)
            if item is None:
                unresolved.append((entry, "item not found"))
                continue
            if entry.fields is not None:
                fields = entry.fields
            else:
                if defects is None:
                    raise ConfigError(
                        "manifest entry omits 'fields' but no audit defect map was provided"
                    )
                fields = defects.get(key, ())
                if not fields:
                    continue  # nothing recorded as defective; item is healthy
            claim(entry, key, item, fields)
            jobs.append(RepairJob(key=key, fields=fields))
        else:
            matched = False
            for item in corpus:
                k = item.key
                if (k.dataset, k.subset, k.split) != (entry.dataset, entry.subset, entry.split):
                    continue
                matched = True
                fields = entry.fields or schema_for(k.dataset).translatable_fields
                claim(entry, k, item, fields)
                jobs.append(RepairJob(key=k, fields=fields))
            if not matched:
                unresolved.append((entry, "no items in the selected split"))
    return jobs, unresolved


@dataclass(frozen=True)
class FragmentBatch:
    """One item's translatable payload plus its write-back plan."""

    key: ItemKey
    fields: tuple[str, ...]
    slots: tuple[FieldSlot, ...]
    fragments: tuple[str, ...]
    serialized: str
    target_language: str
    prefixed: bool
    write_slots: frozenset[FieldSlot]


@dataclass(frozen=True)
class DiagnosticsRecord:
    key: ItemKey
    field: str
    before: str
    after: str
    engine_id: str
    cache_hit: bool
    timestamp: str
    status: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            **self.key.to_dict(),
            "field": self.field,
            "before": self.before,
            "after": self.after,
            "engine_id": self.engine_id,
            "cache_hit": self.cache_hit,
            "timestamp": self.timestamp,
            "status": self.status,
            "note": self.note,
        }


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def build_batches(
    jobs: Sequence[RepairJob],
    corpora: Mapping[str, Corpus],
    english: Corpus,
    *,
    reformat: str = "none",
) -> tuple[list[FragmentBatch], list[DiagnosticsRecord]]:
    """Materialize fragment batches from the English counterparts.

    Items without a resolvable English source go straight to the manual
    queue.  In ``prefix_context`` mode the source context is prepended to
    every choice before serialization and the question fragment is always
    included so the translated context is available for stripping.
    """
    batches: list[FragmentBatch] = []
    failures: list[DiagnosticsRecord] = []
    for job in jobs:
        key = job.key
        if not key.id or not key.language or not key.dataset or not key.split:
            raise LineageError(f"item key is missing identity fields: {key}")
        source_key = ItemKey("en", key.dataset, key.subset, key.split, key.id)
        source = english.lookup(source_key)
        if source is None:
            failures.append(
                DiagnosticsRecord(
                    key=key,
                    field="",
                    before="",
                    after="",
                    engine_id="",
                    cache_hit=False,
                    timestamp=_utc_now(),
                    status=STATUS_MANUAL_QUEUE,
                    note="no English counterpart for re-translation",
                )
            )
            continue
        schema = schema_for(key.dataset)
        prefixed = (
            reformat == "prefix_context"
            and schema.kind == "multiple_choice"
            and any(f.startswith("choices") for f in job.fields)
        )
        extract_from = reformat_continuation_options(source, "prefix_context") if prefixed else source
        plan_fields = tuple(job.fields)
        if prefixed and "question" not in plan_fields:
            plan_fields = ("question",) + plan_fields
        plan: FragmentPlan = extract_fragments(extract_from, schema, plan_fields)
        write_slots = frozenset(_expand_fields(job.fields, source))
        batches.append(
            FragmentBatch(
                key=key,
                fields=tuple(job.fields),
                slots=plan.slots,
                fragments=plan.fragments,
                serialized=serialize_fragments(list(plan.fragments)),
                target_language=key.language,
                prefixed=prefixed,
                write_slots=write_slots,
            )
        )
    return batches, failures


@dataclass
class BatchOutcome:
    batch: FragmentBatch
    translated: tuple[str, ...] | None
    cache_hit: bool
    engine_id: str
    error: str = ""


def _pack_requests(
    batches: Sequence[FragmentBatch], max_payload_bytes: int
) -> list[list[FragmentBatch]]:
    """Greedy packing of serialized payloads up to the byte budget; one
    item's fragments never split across requests."""
    groups: list[list[FragmentBatch]] = []
    current: list[FragmentBatch] = []
    size = 0
    for batch in batches:
        payload = len(batch.serialized.encode("utf-8"))
        if current and size + payload > max_payload_bytes:
            groups.append(current)
            current, size = [], 0
        current.append(batch)
        size += payload
    if current:
        groups.append(current)
    return groups


def translate_batch(
    batches: Sequence[FragmentBatch],
    engine: TranslationEngine,
    cache: TranslationCache,
    *,
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES,
    source_lang: str = "en",
) -> list[BatchOutcome]:
    """Translate batches, consulting the cache before any engine call.

    Engine-side payload corruption (dropped markers, raw markup) marks the
    affected batch for manual inspection; credential and availability
    problems raise and abort the run before anything is written.
    """
    outcomes: dict[int, BatchOutcome] = {}
    misses: list[tuple[int, FragmentBatch]] = []
    for pos, batch in enumerate(batches):
        cached = cache.get(batch.target_language, batch.serialized)
        if cached is None:
            misses.append((pos, batch))
            continue
        outcomes[pos] = _decode_outcome(batch, cached, cache_hit=True, engine_id="cache")

    by_language: dict[str, list[tuple[int, FragmentBatch]]] = {}
    for pos, batch in misses:
        by_language.setdefault(batch.target_language, []).append((pos, batch))

    for language in sorted(by_language):
        entries = by_language[language]
        cursor = 0
        for group in _pack_requests([b for _, b in entries], max_payload_bytes):
            group_positions = [entries[cursor + j][0] for j in range(len(group))]
            cursor += len(group)
            translated = engine.translate(
                [b.serialized for b in group], source_lang, language, "x"
            )
            for pos, batch, payload in zip(group_positions, group, translated):
                outcome = _decode_outcome(batch, payload, cache_hit=False, engine_id=engine.engine_id)
                if not outcome.error:
                    cache.put(batch.target_language, batch.serialized, payload)
                outcomes[pos] = outcome
    return [outcomes[pos] for pos in range(len(batches))]


def _decode_outcome(
    batch: FragmentBatch, payload: str, *, cache_hit: bool, engine_id: str
) -> BatchOutcome:
    try:
        fragments = deserialize_fragments(payload, len(batch.fragments))
    except (FragmentCountMismatchError, UnescapeError) as exc:
        return BatchOutcome(
            batch=batch, translated=None, cache_hit=cache_hit, engine_id=engine_id, error=str(exc)
        )
    return BatchOutcome(
        batch=batch,
        translated=tuple(fragments),
        cache_hit=cache_hit,
        engine_id=engine_id,
    )


def _slot_path(slot: FieldSlot) -> str:
    name, index = slot
    return name if index is None else f"{name}[{index}]"


def _slot_value(item: BenchmarkItem, slot: FieldSlot) -> str:
    name, index = slot
    if name == "question":
        return item.question or ""
    if name == "answer":
        return item.answer or ""
    choices = item.choices or []
    return choices[index] if index is not None and index < len(choices) else ""


def _write_slot(item: BenchmarkItem, slot: FieldSlot, value: str) -> None:
    name, index = slot
    if name == "question":
        item.question = value
    elif name == "answer":
        item.answer = value
    else:
        if item.choices is None:
            item.choices = []
        while len(item.choices) <= (index or 0):
            item.choices.append("")
        item.choices[index or 0] = value


def apply_updates(
    corpus: Corpus, outcomes: Sequence[BatchOutcome]
) -> tuple[Corpus, list[DiagnosticsRecord]]:
    """Write translated fragments back onto their items.

    Only flagged slots change; every overwrite emits one record.  A batch
    that failed translation or prefix-stripping leaves its item
    byte-identical and is queued for manual inspection.
    """
    records: list[DiagnosticsRecord] = []
    replacements: dict[ItemKey, BenchmarkItem] = {}

    for outcome in outcomes:
        batch = outcome.batch
        current = replacements.get(batch.key) or corpus.lookup(batch.key)
        if current is None:
            continue  # outcome belongs to another language's corpus
        if not batch.key.id:
            raise LineageError(f"item key lost identity fields: {batch.key}")

        if outcome.translated is None:
            records.append(
                DiagnosticsRecord(
                    key=batch.key,
                    field="",
                    before="",
                    after="",
                    engine_id=outcome.engine_id,
                    cache_hit=outcome.cache_hit,
                    timestamp=_utc_now(),
                    status=STATUS_MANUAL_QUEUE,
                    note=outcome.error,
                )
            )
            continue

        translated = dict(zip(batch.slots, outcome.translated))
        staged: list[tuple[FieldSlot, str]] = []
        failure: str | None = None
        if batch.prefixed:
            context = translated.get(("question", None), "")
            for slot in batch.slots:
                if slot not in batch.write_slots:
                    continue
                text = translated[slot]
                if slot[0] == "choices":
                    try:
                        text = strip_translated_prefix(context, text)
                    except Exception as exc:
                        failure = str(exc)
                        break
                staged.append((slot, text))
        else:
            staged = [(slot, translated[slot]) for slot in batch.slots if slot in batch.write_slots]

        if failure is not None:
            records.append(
                DiagnosticsRecord(
                    key=batch.key,
                    field="",
                    before="",
                    after="",
                    engine_id=outcome.engine_id,
                    cache_hit=outcome.cache_hit,
                    timestamp=_utc_now(),
                    status=STATUS_MANUAL_QUEUE,
                    note=failure,
                )
            )
            continue

        item = replacements.get(batch.key) or current.copy()
        for slot, text in staged:
            before = _slot_value(item, slot)
            _write_slot(item, slot, text)
            records.append(
                DiagnosticsRecord(
                    key=batch.key,
                    field=_slot_path(slot),
                    before=before,
                    after=text,
                    engine_id=outcome.engine_id,
                    cache_hit=outcome.cache_hit,
                    timestamp=_utc_now(),
                    status=STATUS_UPDATED if text != before else STATUS_UNCHANGED,
                )
            )
        item.schema_violations = validate_item(item, schema_for(item.key.dataset))
        replacements[batch.key] = item

    new_items = [replacements.get(item.key, item) for item in corpus]
    return Corpus(new_items), records


def validate_post_translation(corpus: Corpus) -> list[ItemKey]:
    """Items still failing the completeness check after repair."""
    from ..audit import check_field_completeness

    return check_field_completeness(corpus)


@dataclass
class RepairResult:
    corpora: dict[str, Corpus]
    diagnostics: list[DiagnosticsRecord] = field(default_factory=list)
    unresolved: list[tuple[RepairEntry, str]] = field(default_factory=list)
    still_defective: list[ItemKey] = field(default_factory=list)
    engine_calls: int = 0
    planned_batches: int = 0
    cache_hits: int = 0
    dry_run: bool = False


class _CountingEngine:
    """Wrap an engine to count HTTP-level requests issued."""

    def __init__(self, inner: TranslationEngine):
        self._inner = inner
        self.engine_id = inner.engine_id
        self.calls = 0

    def translate(self, texts, source_lang, target_lang, ignore_tag="x"):
        self.calls += 1
        return self._inner.translate(texts, source_lang, target_lang, ignore_tag)


def run_repair(
    corpora: Mapping[str, Corpus],
    english: Corpus,
    manifest: RepairManifest,
    engine: TranslationEngine | None,
    cache: TranslationCache,
    *,
    defects: Mapping[ItemKey, tuple[str, ...]] | None = None,
    reformat: str = "none",
    max_payload_bytes: int = DEFAULT_MAX_PAYLOAD_BYTES,
    dry_run: bool = False,
) -> RepairResult:
    """End-to-end repair pass over the loaded corpora.

    Unresolvable manifest entries stop the run before any engine traffic.
    ``dry_run`` reports the planned work (batches still uncached and the
    request count they would occupy) without touching the network or the
    corpora.
    """
    jobs, unresolved = resolve_manifest(manifest, corpora, defects)
    if unresolved:
        return RepairResult(corpora=dict(corpora), unresolved=unresolved, dry_run=dry_run)

    batches, pre_failures = build_batches(jobs, corpora, english, reformat=reformat)

    if dry_run:
        misses = [
            b for b in batches if cache.entries.get((b.target_language, b.serialized)) is None
        ]
        by_language: dict[str, list[FragmentBatch]] = {}
        for b in misses:
            by_language.setdefault(b.target_language, []).append(b)
        requests_needed = sum(
            len(_pack_requests(group, max_payload_bytes)) for group in by_language.values()
        )
        return RepairResult(
            corpora=dict(corpora),
            diagnostics=list(pre_failures),
            planned_batches=len(misses),
            cache_hits=len(batches) - len(misses),
            engine_calls=requests_needed,
            dry_run=True,
        )

    if engine is None:
        raise ConfigError("an engine is required unless --dry-run is set")
    counting = _CountingEngine(engine)
    outcomes = translate_batch(
        batches, counting, cache, max_payload_bytes=max_payload_bytes
    )

    updated: dict[str, Corpus] = {}
    diagnostics: list[DiagnosticsRecord] = list(pre_failures)
    for language in sorted(corpora):
        new_corpus, records = apply_updates(corpora[language], outcomes)
        updated[language] = new_corpus
        diagnostics.extend(records)

    still_defective: list[ItemKey] = []
    repaired_keys = {b.key for b in batches}
    for language in sorted(updated):
        for key in validate_post_translation(updated[language]):
            if key in repaired_keys:
                still_defective.append(key)
                diagnostics.append(
                    DiagnosticsRecord(
                        key=key,
                        field="",
                        before="",
                        after="",
                        engine_id=counting.engine_id,
                        cache_hit=False,
                        timestamp=_utc_now(),
                        status=STATUS_MANUAL_QUEUE,
                        note="still incomplete after repair",
                    )
                )

    return RepairResult(
        corpora=updated,
        diagnostics=diagnostics,
        still_defective=still_defective,
        engine_calls=counting.calls,
        planned_batches=len(batches),
        cache_hits=sum(1 for o in outcomes if o.cache_hit),
    )


def write_diagnostics(records: Iterable[DiagnosticsRecord], path: str | Path) -> None:
    with Path(path).open("a", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
