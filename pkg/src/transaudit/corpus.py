"""Benchmark corpus model: item keys, task schemas, JSONL ingestion and writing.

The canonical line format is one JSON object per line with fields
``language, dataset, subset, split, id, question, choices, answer_index,
answer, extra``.  Unknown fields are preserved verbatim in ``extra`` so
that reading and re-writing a corpus never loses data.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Mapping

from .errors import (
    DuplicateKeyError,
    IoFailureError,
    MalformedLineError,
    MissingKeyFieldError,
    SchemaViolationError,
    UnknownDatasetError,
)

DATASETS = ("arc", "gsm8k", "hellaswag", "mmlu", "truthfulqa")
SPLITS = ("train", "validation", "test", "dev")

MULTIPLE_CHOICE = "multiple_choice"
GENERATIVE = "generative"

_LANGUAGE_RE = re.compile(r"^[a-z]{2}$")

#: canonical top-level fields; everything else round-trips through ``extra``
CANONICAL_FIELDS = (
    "language",
    "dataset",
    "subset",
    "split",
    "id",
    "question",
    "choices",
    "answer_index",
    "answer",
    "extra",
)

#: per-dataset upstream-name -> canonical-name tables. Shipped as data so a
#: deployment can override them with a JSON file of the same shape.
DEFAULT_ADAPTERS: dict[str, dict[str, str]] = {
    "arc": {"answerKey": "answer_index"},
    "gsm8k": {},
    "hellaswag": {"ctx": "question", "endings": "choices", "label": "answer_index"},
    "mmlu": {"answer": "answer_index"},
    "truthfulqa": {"mc1_indices": "answer_index", "mc2_indices": "answer_index"},
}


@dataclass(frozen=True, order=True)
class ItemKey:
    """Cross-suite identity of one benchmark entry."""

    language: str
    dataset: str
    subset: str | None
    split: str
    id: str

    def base(self) -> tuple[str, str | None, str, str]:
        """Language-independent identity used for cross-language matching."""
        return (self.dataset, self.subset, self.split, self.id)

    def sort_key(self) -> tuple[str, str, str, str, str]:
        return (self.dataset, self.subset or "", self.split, self.language, self.id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "language": self.language,
            "dataset": self.dataset,
            "subset": self.subset,
            "split": self.split,
            "id": self.id,
        }

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "ItemKey":
        return cls(
            language=str(obj["language"]),
            dataset=str(obj["dataset"]),
            subset=(None if obj.get("subset") in (None, "") else str(obj["subset"])),
            split=str(obj["split"]),
            id=str(obj["id"]),
        )


@dataclass(frozen=True)
class TaskSchema:
    dataset: str
    kind: str
    required_fields: tuple[str, ...]
    translatable_fields: tuple[str, ...]


_SCHEMAS: dict[str, TaskSchema] = {
    "arc": TaskSchema("arc", MULTIPLE_CHOICE, ("question", "choices"), ("question", "choices")),
    "hellaswag": TaskSchema(
        "hellaswag", MULTIPLE_CHOICE, ("question", "choices"), ("question", "choices")
    ),
    "mmlu": TaskSchema("mmlu", MULTIPLE_CHOICE, ("question", "choices"), ("question", "choices")),
    "truthfulqa": TaskSchema(
        "truthfulqa", MULTIPLE_CHOICE, ("question", "choices"), ("question", "choices")
    ),
    "gsm8k": TaskSchema("gsm8k", GENERATIVE, ("question", "answer"), ("question", "answer")),
}


def schema_for(dataset: str) -> TaskSchema:
    """Registered task schema for one of the five dataset families."""
    try:
        return _SCHEMAS[dataset]
    except KeyError:
        raise UnknownDatasetError(f"unknown dataset {dataset!r}") from None


@dataclass
class BenchmarkItem:
    """One translated (or source) benchmark entry.

    ``schema_violations`` holds machine-readable defect codes recorded at
    parse time when lenient loading is active (``field:empty``,
    ``choices:missing``, ``choices[i]:empty``, ``answer_index:missing``,
    ``answer_index:range``).
    """

    key: ItemKey
    question: str | None = None
    choices: list[str] | None = None
    answer_index: int | list[int] | None = None
    answer: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    schema_violations: tuple[str, ...] = ()

    def copy(self) -> "BenchmarkItem":
        return replace(
            self,
            choices=None if self.choices is None else list(self.choices),
            answer_index=(
                list(self.answer_index)
                if isinstance(self.answer_index, list)
                else self.answer_index
            ),
            extra=dict(self.extra),
        )


def _is_blank(text: str | None) -> bool:
    return text is None or text.strip() == ""


def validate_item(item: BenchmarkItem, schema: TaskSchema) -> tuple[str, ...]:
    """Defect codes for one item under its task schema.

    Field-completeness codes double as repair field paths; index codes are
    answer-alignment bookkeeping and never trigger re-translation.
    """
    codes: list[str] = []
    if _is_blank(item.question):
        codes.append("question:empty")
    if schema.kind == MULTIPLE_CHOICE:
        if not item.choices:
            codes.append("choices:missing")
        else:
            for i, choice in enumerate(item.choices):
                if _is_blank(choice):
                    codes.append(f"choices[{i}]:empty")
        if item.answer_index is None:
            codes.append("answer_index:missing")
        elif item.choices:
            indices = (
                item.answer_index if isinstance(item.answer_index, list) else [item.answer_index]
            )
            if any(i < 0 or i >= len(item.choices) for i in indices):
                codes.append("answer_index:range")
    else:
        if _is_blank(item.answer):
            codes.append("answer:empty")
    return tuple(codes)


def completeness_violations(item: BenchmarkItem) -> tuple[str, ...]:
    """Subset of defect codes that represent missing/empty essential content."""
    return tuple(c for c in item.schema_violations if not c.startswith("answer_index:"))


def defective_fields(item: BenchmarkItem) -> tuple[str, ...]:
    """Repairable field paths derived from recorded completeness defects."""
    fields: list[str] = []
    for code in completeness_violations(item):
        name = code.split(":", 1)[0]
        if name == "choices" and code == "choices:missing":
            fields.append("choices")
        else:
            fields.append(name)
    return tuple(dict.fromkeys(fields))


class Corpus:
    """Immutable ordered collection of items with a key index."""

    def __init__(self, items: list[BenchmarkItem]):
        self._items = items
        self._index: dict[ItemKey, int] = {}
        for pos, item in enumerate(items):
            if item.key in self._index:
                raise DuplicateKeyError(item.key)
            self._index[item.key] = pos

    @property
    def items(self) -> list[BenchmarkItem]:
        return self._items

    def lookup(self, key: ItemKey) -> BenchmarkItem | None:
        pos = self._index.get(key)
        return None if pos is None else self._items[pos]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[BenchmarkItem]:
        return iter(self._items)

    def __contains__(self, key: ItemKey) -> bool:
        return key in self._index

    def languages(self) -> tuple[str, ...]:
        return tuple(sorted({item.key.language for item in self._items}))


_LETTER_INDEX = {letter: i for i, letter in enumerate("ABCDE")}


def normalize_answer_index(raw: Any) -> tuple[int | list[int] | None, bool]:
    """Map upstream answer labels onto zero-based indices.

    Returns ``(normalized, transformed)`` where ``transformed`` says the raw
    value was rewritten (so the original must be preserved in ``extra``).
    Ints and int lists are taken as already zero-based; letters "A"-"E" map
    to 0-4; digit strings are 1-based labels ("1" selects the first choice).
    """
    if raw is None:
        return None, False
    if isinstance(raw, bool):
        return None, False
    if isinstance(raw, int):
        return raw, False
    if isinstance(raw, list):
        if all(isinstance(v, int) and not isinstance(v, bool) for v in raw):
            return list(raw), False
        normalized = []
        for v in raw:
            value, _ = normalize_answer_index(v)
            if not isinstance(value, int):
                return None, False
            normalized.append(value)
        return normalized, True
    if isinstance(raw, str):
        text = raw.strip()
        upper = text.upper()
        if upper in _LETTER_INDEX:
            return _LETTER_INDEX[upper], True
        if text.isdigit():
            value = int(text)
            return (value - 1 if value >= 1 else 0), True
    return None, False


def _parse_line(
    obj: dict[str, Any],
    line_no: int,
    adapters: Mapping[str, Mapping[str, str]],
    defaults: Mapping[str, str],
    group_counters: dict[tuple[str, str | None, str], int],
) -> BenchmarkItem:
    dataset = obj.get("dataset", defaults.get("dataset"))
    if dataset is None:
        raise MissingKeyFieldError(line_no, "dataset")
    dataset = str(dataset)
    if dataset not in DATASETS:
        raise UnknownDatasetError(f"line {line_no}: unknown dataset {dataset!r}")

    adapter = adapters.get(dataset, {})
    renamed: dict[str, Any] = {}
    consumed: set[str] = set()
    answer_index_source: str | None = None
    # adapter-directed renames first; table order sets priority when several
    # upstream names target the same canonical field (TruthfulQA mc1 vs mc2)
    for upstream, canonical in adapter.items():
        if upstream in obj and canonical not in obj and canonical not in renamed:
            renamed[canonical] = obj[upstream]
            consumed.add(upstream)
            if canonical == "answer_index":
                answer_index_source = upstream
    for name, value in obj.items():
        if name in consumed:
            continue
        renamed.setdefault(name, value)

    language = renamed.get("language", defaults.get("language"))
    if language is None:
        raise MissingKeyFieldError(line_no, "language")
    language = str(language).lower()
    if not _LANGUAGE_RE.match(language):
        raise MalformedLineError(line_no, f"invalid language code {language!r}")

    split = renamed.get("split", defaults.get("split"))
    if split is None:
        raise MissingKeyFieldError(line_no, "split")
    split = str(split)
    if split not in SPLITS:
        raise MalformedLineError(line_no, f"unknown split {split!r}")

    subset = renamed.get("subset", defaults.get("subset"))
    subset = None if subset in (None, "") else str(subset)

    group = (dataset, subset, split)
    ordinal = group_counters.get(group, 0)
    group_counters[group] = ordinal + 1
    item_id = renamed.get("id")
    if item_id in (None, ""):
        # lineage for id-less upstream rows: zero-padded ordinal per group
        item_id = f"{ordinal:06d}"
    item_id = str(item_id)

    question = renamed.get("question")
    question = None if question is None else str(question)
    choices = renamed.get("choices")
    if choices is not None:
        if not isinstance(choices, list):
            raise MalformedLineError(line_no, "choices must be an array of strings")
        choices = [str(c) for c in choices]
    answer = renamed.get("answer")
    answer = None if answer is None else str(answer)

    raw_index = renamed.get("answer_index")
    answer_index, transformed = normalize_answer_index(raw_index)

    extra: dict[str, Any] = {}
    declared_extra = renamed.get("extra")
    if isinstance(declared_extra, dict):
        extra.update(declared_extra)
    if transformed:
        extra.setdefault(answer_index_source or "answer_index_raw", raw_index)
    for name, value in renamed.items():
        if name not in CANONICAL_FIELDS:
            extra.setdefault(name, value)

    key = ItemKey(language=language, dataset=dataset, subset=subset, split=split, id=item_id)
    return BenchmarkItem(
        key=key,
        question=question,
        choices=choices,
        answer_index=answer_index,
        answer=answer,
        extra=extra,
    )


def parse_jsonl_corpus(
    path: str | Path,
    schema: TaskSchema | None = None,
    *,
    strict: bool = False,
    adapters: Mapping[str, Mapping[str, str]] | None = None,
    defaults: Mapping[str, str] | None = None,
) -> Corpus:
    """Read one JSON object per line into a :class:`Corpus`.

    Parsing is lenient by default: structurally broken items (empty fields,
    missing answers) are loaded with their defects recorded in
    ``schema_violations`` so the auditor can count them.  ``strict=True``
    raises :class:`SchemaViolationError` on the first defective item and is
    meant for post-repair verification.

    ``schema`` pins the corpus to one dataset; when omitted, each line's
    ``dataset`` field selects its registered schema.  ``defaults`` supplies
    key fields (language/dataset/subset/split) missing from upstream rows.
    """
    path = Path(path)
    items: list[BenchmarkItem] = []
    seen: set[ItemKey] = set()
    adapters = adapters if adapters is not None else DEFAULT_ADAPTERS
    defaults = defaults or {}
    group_counters: dict[tuple[str, str | None, str], int] = {}

    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(line_no, exc.msg) from exc
            if not isinstance(obj, dict):
                raise MalformedLineError(line_no, "expected a JSON object")

            item = _parse_line(obj, line_no, adapters, defaults, group_counters)
            if schema is not None and item.key.dataset != schema.dataset:
                raise SchemaViolationError(
                    f"line {line_no}: dataset {item.key.dataset!r} does not match "
                    f"schema {schema.dataset!r}"
                )
            item_schema = schema if schema is not None else schema_for(item.key.dataset)
            item.schema_violations = validate_item(item, item_schema)
            if strict and item.schema_violations:
                raise SchemaViolationError(
                    f"line {line_no}: {item.key}: {', '.join(item.schema_violations)}"
                )
            if item.key in seen:
                raise DuplicateKeyError(item.key)
            seen.add(item.key)
            items.append(item)

    return Corpus(items)


def item_to_dict(item: BenchmarkItem) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "language": item.key.language,
        "dataset": item.key.dataset,
    }
    if item.key.subset is not None:
        obj["subset"] = item.key.subset
    obj["split"] = item.key.split
    obj["id"] = item.key.id
    if item.question is not None:
        obj["question"] = item.question
    if item.choices is not None:
        obj["choices"] = item.choices
    if item.answer_index is not None:
        obj["answer_index"] = item.answer_index
    if item.answer is not None:
        obj["answer"] = item.answer
    if item.extra:
        obj["extra"] = item.extra
    return obj


def write_jsonl_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write items in order, one canonical JSON object per line (UTF-8)."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            for item in corpus:
                handle.write(json.dumps(item_to_dict(item), ensure_ascii=False))
                handle.write("\n")
    except OSError as exc:
        raise IoFailureError(f"cannot write corpus to {path}: {exc}") from exc


def load_adapter_table(path: str | Path) -> dict[str, dict[str, str]]:
    """Load a per-dataset field-name adapter table from a JSON file."""
    with Path(path).open("r", encoding="utf-8") as handle:
        raw = json.load(handle)
    table: dict[str, dict[str, str]] = {}
    for dataset, mapping in raw.items():
        if dataset not in DATASETS:
            raise UnknownDatasetError(f"adapter table references unknown dataset {dataset!r}")
        table[dataset] = {str(k): str(v) for k, v in mapping.items()}
    return table
