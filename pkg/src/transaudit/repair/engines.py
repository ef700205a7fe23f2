"""Translation engine clients: a DeepL-compatible HTTP client and an
offline deterministic mock.

Both expose the same surface: ``translate(texts, source_lang, target_lang,
ignore_tag)`` where each element of ``texts`` is one item's serialized
fragment payload and the engine must leave ``<x>…</x>`` markup untouched.
"""

from __future__ import annotations

import logging
import os
import random
import time
from typing import Callable, Protocol, Sequence

import requests

from ..errors import AuthFailureError, EngineError, EngineUnavailableError

logger = logging.getLogger(__name__)

ENGINE_KEY_ENV = "TRANSAUDIT_ENGINE_KEY"

RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class TranslationEngine(Protocol):
    engine_id: str

    def translate(
        self,
        texts: Sequence[str],
        source_lang: str,
        target_lang: str,
        ignore_tag: str = "x",
    ) -> list[str]: ...


class DeepLCompatibleEngine:
    """HTTP client for a DeepL-shaped ``/v2/translate`` endpoint.

    Tag handling is forced to XML with the fragment marker tag ignored.
    Retries 429/5xx with jittered exponential backoff (5 attempts, base
    1 s); other 4xx are fatal.  ``session`` and ``sleep`` are injectable
    for tests.
    """

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        *,
        session=None,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
        timeout: float = 60.0,
    ):
        if api_key is None:
            api_key = os.environ.get(ENGINE_KEY_ENV)
        if not api_key:
            raise AuthFailureError(
                f"no engine credential: set {ENGINE_KEY_ENV} or pass api_key"
            )
        self.base_url = base_url.rstrip("/")
        self.engine_id = f"deepl:{self.base_url}"
        self._api_key = api_key
        self._session = session or requests.Session()
        self._max_attempts = max_attempts
        self._backoff_base = backoff_base
        self._sleep = sleep
        self._timeout = timeout
        self._jitter = random.Random(0)

    def translate(
        self,
        texts: Sequence[str],
        source_lang: str,
        target_lang: str,
        ignore_tag: str = "x",
    ) -> list[str]:
        data = [("text", t) for t in texts]
        data += [
            ("source_lang", source_lang.upper()),
            ("target_lang", target_lang.upper()),
            ("tag_handling", "xml"),
            ("ignore_tags", ignore_tag),
        ]
        headers = {"Authorization": f"DeepL-Auth-Key {self._api_key}"}
        url = f"{self.base_url}/v2/translate"
        last_error = "no attempt made"
        for attempt in range(self._max_attempts):
            if attempt:
                delay = self._backoff_base * (2 ** (attempt - 1))
                delay += self._jitter.uniform(0, delay / 4)
                self._sleep(delay)
            try:
                response = self._session.post(url, data=data, headers=headers, timeout=self._timeout)
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                logger.warning("engine call failed (attempt %d): %s", attempt + 1, last_error)
                continue
            if response.status_code in (401, 403):
                raise AuthFailureError(f"engine rejected credential (HTTP {response.status_code})")
            if response.status_code in RETRYABLE_STATUS:
                last_error = f"HTTP {response.status_code}"
                logger.warning("engine call failed (attempt %d): %s", attempt + 1, last_error)
                continue
            if response.status_code != 200:
                raise EngineError(f"engine returned HTTP {response.status_code}: {response.text[:200]}")
            payload = response.json()
            translations = [entry["text"] for entry in payload.get("translations", [])]
            if len(translations) != len(texts):
                raise EngineError(
                    f"engine returned {len(translations)} translations for {len(texts)} texts"
                )
            return translations
        raise EngineUnavailableError(
            f"engine unavailable after {self._max_attempts} attempts ({last_error})"
        )


class MockEngine:
    """Deterministic offline engine.

    Splits each payload on the ignore-tag marker and rewrites every
    fragment with a language-tagged transform, leaving markers intact:
    the same contract a real engine honors when told to ignore ``<x>``.
    """

    def __init__(
        self,
        transform: Callable[[str, str], str] | None = None,
        engine_id: str = "mock",
    ):
        # transform(escaped_fragment_text, target_lang) -> escaped text
        self._transform = transform or (lambda text, lang: f"[{lang}] {text}" if text else text)
        self.engine_id = engine_id
        self.calls = 0
        self.texts_seen = 0

    def translate(
        self,
        texts: Sequence[str],
        source_lang: str,
        target_lang: str,
        ignore_tag: str = "x",
    ) -> list[str]:
        self.calls += 1
        self.texts_seen += len(texts)
        marker = f"<{ignore_tag}>SEP</{ignore_tag}>"
        out = []
        for text in texts:
            parts = text.split(marker)
            out.append(marker.join(self._transform(p, target_lang) for p in parts))
        return out
