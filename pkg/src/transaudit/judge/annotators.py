"""Annotator clients, strict response parsing, and the resumable run loop."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import requests

from ..corpus import BenchmarkItem, Corpus, ItemKey
from ..errors import (
    AuthFailureError,
    EngineError,
    EngineUnavailableError,
    JudgeRunError,
    MissingSourceError,
    TransauditError,
)
from .aggregate import PARSE_FAILED, PARSE_OK, PARSE_REPAIRED, ErrorSpan, ItemAnnotation
from .prompts import FewShotExample, build_prompt, load_few_shots, load_template

logger = logging.getLogger(__name__)

JUDGE_ENV_PREFIX = "TRANSAUDIT_JUDGE_"

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


def _env_slug(annotator_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9]", "_", annotator_id).upper()


def key_env_for(annotator_id: str) -> str:
    return f"{JUDGE_ENV_PREFIX}{_env_slug(annotator_id)}_KEY"


def url_env_for(annotator_id: str) -> str:
    return f"{JUDGE_ENV_PREFIX}{_env_slug(annotator_id)}_URL"


@dataclass(frozen=True)
class AnnotatorConfig:
    annotator_id: str
    endpoint: str  # base URL; "mock:" selects the offline annotator
    model_name: str
    key_env: str | None = None  # defaults to TRANSAUDIT_JUDGE_<ID>_KEY
    temperature: float = 0.0
    max_retries: int = 3

    def credential(self) -> str | None:
        return os.environ.get(self.key_env or key_env_for(self.annotator_id))


class AnnotatorClient(Protocol):
    def complete(self, prompt: str) -> str: ...


class ChatCompletionsClient:
    """Minimal chat-completions HTTP caller with retry/backoff."""

    def __init__(
        self,
        cfg: AnnotatorConfig,
        *,
        session=None,
        sleep: Callable[[float], None] = time.sleep,
        timeout: float = 120.0,
    ):
        self.cfg = cfg
        self._session = session or requests.Session()
        self._sleep = sleep
        self._timeout = timeout

    def complete(self, prompt: str) -> str:
        url = f"{self.cfg.endpoint.rstrip('/')}/chat/completions"
        body = {
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        }
        headers = {}
        credential = self.cfg.credential()
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        attempts = self.cfg.max_retries + 1
        last_error = "no attempt made"
        for attempt in range(attempts):
            if attempt:
                self._sleep(min(30.0, 2.0 ** (attempt - 1)))
            try:
                response = self._session.post(url, json=body, headers=headers, timeout=self._timeout)
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                continue
            if response.status_code in (401, 403):
                raise AuthFailureError(
                    f"annotator {self.cfg.annotator_id} rejected credential "
                    f"(HTTP {response.status_code})"
                )
            if response.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise EngineError(
                    f"annotator {self.cfg.annotator_id} returned HTTP {response.status_code}"
                )
            payload = response.json()
            try:
                return payload["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError):
                raise EngineError(
                    f"annotator {self.cfg.annotator_id} returned an unexpected payload shape"
                ) from None
        raise EngineUnavailableError(
            f"annotator {self.cfg.annotator_id} unavailable after {attempts} attempts "
            f"({last_error})"
        )


class MockAnnotator:
    """Deterministic offline annotator for tests and dry runs.

    Decisions derive from a SHA-256 digest of (annotator id, prompt), so
    repeated runs agree byte-for-byte across platforms.
    """

    _CATEGORIES = (
        "accuracy/mistranslation",
        "accuracy/omission",
        "fluency/grammar",
        "fluency/punctuation",
        "terminology",
    )

    def __init__(self, annotator_id: str):
        self.annotator_id = annotator_id
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        digest = hashlib.sha256(f"{self.annotator_id}\x00{prompt}".encode("utf-8")).digest()
        if digest[0] % 3 == 0:
            return json.dumps({"errors": []})
        errors = []
        n_errors = 1 + digest[1] % 2
        for i in range(n_errors):
            errors.append(
                {
                    "span": f"span-{digest[2 + i] % 7}",
                    "category": self._CATEGORIES[digest[4 + i] % len(self._CATEGORIES)],
                    "severity": "major" if digest[6 + i] % 2 == 0 else "minor",
                }
            )
        return json.dumps({"errors": errors})


_FENCE_RE = re.compile(r"^\s*```[a-zA-Z0-9_-]*\s*\n(.*?)\n\s*```\s*$", re.DOTALL)


def _strip_fences(text: str) -> str:
    match = _FENCE_RE.match(text)
    return match.group(1) if match else text


def _first_balanced_object(text: str) -> str | None:
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for pos in range(start, len(text)):
            ch = text[pos]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : pos + 1]
        start = text.find("{", start + 1)
    return None


def _strict_spans(obj) -> tuple[ErrorSpan, ...] | None:
    if not isinstance(obj, dict) or "errors" not in obj or not isinstance(obj["errors"], list):
        return None
    spans: list[ErrorSpan] = []
    for entry in obj["errors"]:
        if not isinstance(entry, dict):
            return None
        span_text = entry.get("span", entry.get("span_text"))
        category = entry.get("category")
        severity = entry.get("severity")
        if not isinstance(span_text, str) or not isinstance(category, str):
            return None
        if not isinstance(severity, str) or severity.lower() not in ("major", "minor"):
            return None
        spans.append(ErrorSpan(span_text, category, severity.lower()))
    return tuple(spans)


def parse_annotator_response(text: str) -> tuple[tuple[ErrorSpan, ...] | None, str]:
    """Parse a response against the strict span schema.

    Direct parses are ``ok``; one repair attempt (fence stripping plus
    first-balanced-object extraction) yields ``repaired``; anything else
    is ``failed``.
    """
    stripped = text.strip()
    try:
        spans = _strict_spans(json.loads(stripped))
        if spans is not None:
            return spans, PARSE_OK
    except json.JSONDecodeError:
        pass
    candidate = _strip_fences(stripped)
    extracted = _first_balanced_object(candidate)
    if extracted is not None:
        try:
            spans = _strict_spans(json.loads(extracted))
            if spans is not None:
                return spans, PARSE_REPAIRED
        except json.JSONDecodeError:
            pass
    return None, PARSE_FAILED


REASK_SUFFIX = (
    "\n\nYour previous reply was not valid JSON for the required schema. "
    "Respond again with ONLY the JSON object."
)


def call_annotator(
    key: ItemKey,
    prompt: str,
    cfg: AnnotatorConfig,
    client: AnnotatorClient,
) -> ItemAnnotation:
    """One annotation attempt with a single automatic re-ask on parse
    failure; a second failure records an abstaining annotation."""
    raw = client.complete(prompt)
    spans, status = parse_annotator_response(raw)
    if status == PARSE_FAILED:
        raw_retry = client.complete(prompt + REASK_SUFFIX)
        spans, retry_status = parse_annotator_response(raw_retry)
        raw = f"{raw}\n---[reask]---\n{raw_retry}"
        status = PARSE_REPAIRED if retry_status != PARSE_FAILED else PARSE_FAILED
    return ItemAnnotation(
        key=key,
        annotator_id=cfg.annotator_id,
        spans=spans or (),
        raw_response=raw,
        parse_status=status,
    )


class AnnotationStore:
    """Append-only JSONL store of annotations, keyed for resumption."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.records: dict[tuple[ItemKey, str], ItemAnnotation] = {}
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    annotation = ItemAnnotation.from_dict(json.loads(line))
                    self.records[(annotation.key, annotation.annotator_id)] = annotation

    def completed(self, key: ItemKey, annotator_id: str) -> bool:
        return (key, annotator_id) in self.records

    def get(self, key: ItemKey, annotator_id: str) -> ItemAnnotation | None:
        return self.records.get((key, annotator_id))

    def append(self, annotation: ItemAnnotation) -> None:
        self.records[(annotation.key, annotation.annotator_id)] = annotation
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(annotation.to_dict(), ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self.records)


def make_client(cfg: AnnotatorConfig, *, session=None) -> AnnotatorClient:
    if cfg.endpoint.startswith("mock:"):
        return MockAnnotator(cfg.annotator_id)
    return ChatCompletionsClient(cfg, session=session)


def run_judging(
    source: Corpus,
    target: Corpus,
    pool: Sequence[AnnotatorConfig],
    store: AnnotationStore,
    *,
    clients: Mapping[str, AnnotatorClient] | None = None,
    few_shots: list[FewShotExample] | None = None,
    template=None,
    fail_threshold: float = 0.5,
) -> list[ItemAnnotation]:
    """Annotate every (item, annotator) pair, resuming from the store.

    Completed pairs are never re-requested.  Per-call transport failures
    are tolerated up to ``fail_threshold`` of attempted calls, after which
    the run aborts.
    """
    if clients is None:
        clients = {cfg.annotator_id: make_client(cfg) for cfg in pool}
    if few_shots is None:
        few_shots = load_few_shots()
    template = template or load_template()

    by_base: dict[tuple, BenchmarkItem] = {
        (item.key.dataset, item.key.id): item for item in source
    }
    annotations: list[ItemAnnotation] = []
    attempted = 0
    failures = 0
    for item in target:
        source_item = by_base.get((item.key.dataset, item.key.id))
        for cfg in pool:
            existing = store.get(item.key, cfg.annotator_id)
            if existing is not None:
                annotations.append(existing)
                continue
            attempted += 1
            try:
                prompt = build_prompt(
                    item, source_item, few_shots=few_shots, template=template
                )
                annotation = call_annotator(item.key, prompt, cfg, clients[cfg.annotator_id])
            except MissingSourceError as exc:
                failures += 1
                logger.warning("skipping %s/%s: %s", item.key.id, cfg.annotator_id, exc)
                continue
            except TransauditError as exc:
                failures += 1
                logger.warning("annotator call failed for %s/%s: %s", item.key.id, cfg.annotator_id, exc)
                continue
            store.append(annotation)
            annotations.append(annotation)
    if attempted and failures / attempted > fail_threshold:
        raise JudgeRunError(
            f"{failures} of {attempted} annotator calls failed "
            f"(threshold {fail_threshold:.0%})"
        )
    return annotations
