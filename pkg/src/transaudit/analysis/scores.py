"""Per-segment quality-estimation score records and their JSONL ingestion."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..corpus import ItemKey
from ..errors import (
    DuplicateScoreError,
    MalformedLineError,
    MissingKeyFieldError,
    ScoreOutOfRangeError,
)

MODES = ("ref_free", "ref_based")


@dataclass(frozen=True)
class SegmentScore:
    key: ItemKey
    system: str
    mode: str
    score: float
    target_text: str | None = None
    word_count: int | None = None


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs under Unicode whitespace."""
    return len(text.split())


def load_scores(path: str | Path) -> list[SegmentScore]:
    """Read score records from JSONL, one object per line.

    Scores outside [0, 1] and duplicate (key, system, mode) records are
    rejected.  ``word_count`` is taken from the record when present, else
    derived from ``target_text``.
    """
    records: list[SegmentScore] = []
    seen: set[tuple[ItemKey, str, str]] = set()
    with Path(path).open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(line_no, exc.msg) from exc
            if not isinstance(obj, dict):
                raise MalformedLineError(line_no, "expected a JSON object")
            for name in ("language", "dataset", "split", "id", "system", "mode", "score"):
                if name not in obj:
                    raise MissingKeyFieldError(line_no, name)
            mode = str(obj["mode"])
            if mode not in MODES:
                raise MalformedLineError(line_no, f"unknown mode {mode!r}")
            try:
                score = float(obj["score"])
            except (TypeError, ValueError):
                raise MalformedLineError(line_no, "score must be a number") from None
            if not (0.0 <= score <= 1.0):
                raise ScoreOutOfRangeError(f"line {line_no}: score {score} outside [0, 1]")
            key = ItemKey(
                language=str(obj["language"]).lower(),
                dataset=str(obj["dataset"]),
                subset=None if obj.get("subset") in (None, "") else str(obj["subset"]),
                split=str(obj["split"]),
                id=str(obj["id"]),
            )
            system = str(obj["system"])
            ident = (key, system, mode)
            if ident in seen:
                raise DuplicateScoreError(f"line {line_no}: duplicate record for {ident}")
            seen.add(ident)
            target_text = obj.get("target_text")
            target_text = None if target_text is None else str(target_text)
            wc = obj.get("word_count")
            if wc is None and target_text is not None:
                wc = word_count(target_text)
            records.append(
                SegmentScore(
                    key=key,
                    system=system,
                    mode=mode,
                    score=score,
                    target_text=target_text,
                    word_count=None if wc is None else int(wc),
                )
            )
    return records
