"""Persistent translation cache keyed by (target language, formatted source)."""

from __future__ import annotations

import json
import logging
from pathlib import Path

logger = logging.getLogger(__name__)


class TranslationCache:
    """Append-only JSONL cache of formatted source -> formatted target.

    The full file is loaded at construction; duplicate keys resolve
    last-write-wins, so re-running a repair with an existing cache file
    reproduces earlier hit behavior exactly.  A hit never reaches the
    engine.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = None if path is None else Path(path)
        self.entries: dict[tuple[str, str], str] = {}
        self.hits = 0
        self.misses = 0
        if self.path is not None and self.path.exists():
            with self.path.open("r", encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    self.entries[(record["target_language"], record["source"])] = record["target"]
            logger.info("loaded %d cache entries from %s", len(self.entries), self.path)

    def get(self, target_language: str, source: str) -> str | None:
        value = self.entries.get((target_language, source))
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, target_language: str, source: str, target: str) -> None:
        self.entries[(target_language, source)] = target
        if self.path is not None:
            record = {"target_language": target_language, "source": source, "target": target}
            with self.path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self.entries)
