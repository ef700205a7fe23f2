from __future__ import annotations

import json
from pathlib import Path

import pytest

from transaudit.corpus import BenchmarkItem, Corpus, ItemKey


def make_key(
    language: str = "de",
    dataset: str = "arc",
    subset: str | None = None,
    split: str = "test",
    id: str = "q1",
) -> ItemKey:
    return ItemKey(language=language, dataset=dataset, subset=subset, split=split, id=id)


def make_item(
    language: str = "de",
    dataset: str = "arc",
    subset: str | None = None,
    split: str = "test",
    id: str = "q1",
    question: str | None = "What?",
    choices: list[str] | None = None,
    answer_index=0,
    answer: str | None = None,
    extra: dict | None = None,
) -> BenchmarkItem:
    from transaudit.corpus import schema_for, validate_item

    if choices is None and schema_for(dataset).kind == "multiple_choice":
        choices = ["a", "b", "c", "d"]
    item = BenchmarkItem(
        key=make_key(language, dataset, subset, split, id),
        question=question,
        choices=choices,
        answer_index=answer_index,
        answer=answer,
        extra=extra or {},
    )
    item.schema_violations = validate_item(item, schema_for(dataset))
    return item


def corpus_of(*items: BenchmarkItem) -> Corpus:
    return Corpus(list(items))


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def arc_row() -> dict:
    return {
        "language": "de",
        "dataset": "arc",
        "subset": "easy",
        "split": "test",
        "id": "q1",
        "question": "Welche Farbe hat der Himmel?",
        "choices": ["blau", "rot", "gelb", "schwarz"],
        "answer_index": 0,
    }
