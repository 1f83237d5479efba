"""JSON-over-HTTP gateway backend for hosted completion models.

The wire contract is a single POST endpoint taking {capability, model,
prompt, inputs} and returning {result, confidence, model}; the full
request/response shapes are documented in docs/api.md.  Prompts are
rendered from versioned template files shipped under data/prompts/ so a
prompt change is a data change, not a code change.
"""

from __future__ import annotations

import os
import threading
import time
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import httpx

from ..model import NOT_FOUND_TEXT
from . import (
    AUTO,
    Capability,
    ExtractResult,
    GatewayError,
    GatewayLimits,
    GatewayUnavailable,
    PayloadTooLarge,
    Sentiment,
    TranslationResult,
    UnsupportedLanguage,
)

DEFAULT_API_KEY_ENV = "VTA_GATEWAY_API_KEY"
PROMPT_VERSION = "v1"

_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})
_MAX_RETRIES = 2
_BACKOFF_BASE_S = 0.5

_TEMPLATE_FILES = {
    Capability.EXTRACT: "extract",
    Capability.RANK: "rank",
    Capability.TRANSLATE: "translate",
    Capability.SENTIMENT: "sentiment",
}


def _load_templates(data_dir: str | Path | None) -> dict[Capability, str]:
    out: dict[Capability, str] = {}
    for capability, stem in _TEMPLATE_FILES.items():
        name = f"{stem}.{PROMPT_VERSION}.txt"
        if data_dir is None:
            text = resources.files("virtualta.data.prompts").joinpath(name).read_text("utf-8")
        else:
            text = (Path(data_dir) / name).read_text("utf-8")
        out[capability] = text
    return out


class HttpGateway:
    """Client for a generic completion service speaking the documented API.

    The API key is read from the environment (never from config files) and
    sent as a bearer token.  Retryable failures (transport errors, 429,
    5xx) are retried at most twice with exponential backoff before
    surfacing GatewayUnavailable; the ``sleep`` hook exists so tests can
    run the backoff without waiting.
    """

    name = "http"

    def __init__(
        self,
        endpoint: str,
        *,
        model: str = "default",
        api_key_env: str = DEFAULT_API_KEY_ENV,
        limits: GatewayLimits = GatewayLimits(),
        max_in_flight: int = 8,
        languages: frozenset[str] = frozenset({"en", "es", "fr", "de"}),
        prompt_dir: str | Path | None = None,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        self._endpoint = endpoint
        self._model = model
        self._api_key = os.environ.get(api_key_env, "")
        self._limits = limits
        self._languages = languages
        self._templates = _load_templates(prompt_dir)
        self._sleep = sleep
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._client = client or httpx.Client(timeout=limits.max_latency_s)

    def close(self) -> None:
        self._client.close()

    def capabilities(self) -> frozenset[Capability]:
        return frozenset(Capability)

    def supported_languages(self) -> frozenset[str]:
        return self._languages

    # -- wire helpers ----------------------------------------------------

    def _render(self, capability: Capability, **fields: str) -> str:
        prompt = self._templates[capability].format(**fields)
        if len(prompt) > self._limits.max_payload_chars:
            raise PayloadTooLarge(len(prompt), self._limits.max_payload_chars)
        return prompt

    def _call(self, capability: Capability, prompt: str, inputs: dict[str, Any]) -> dict[str, Any]:
        body = {
            "capability": capability.value,
            "model": self._model,
            "prompt": prompt,
            "inputs": inputs,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"

        last_error: Exception | None = None
        for attempt in range(_MAX_RETRIES + 1):
            if attempt:
                self._sleep(_BACKOFF_BASE_S * (2 ** (attempt - 1)))
            try:
                with self._semaphore:
                    response = self._client.post(self._endpoint, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code in _RETRYABLE_STATUS:
                last_error = GatewayError(f"backend returned {response.status_code}")
                continue
            if response.status_code != 200:
                detail = response.text[:200]
                raise GatewayError(f"backend returned {response.status_code}: {detail}")
            try:
                payload = response.json()
            except ValueError as exc:
                raise GatewayError("backend returned invalid JSON") from exc
            if not isinstance(payload, dict) or "result" not in payload:
                raise GatewayError("backend response missing result")
            return payload
        raise GatewayUnavailable(
            f"backend unreachable after {_MAX_RETRIES + 1} attempts: {last_error}"
        )

    @staticmethod
    def _confidence(payload: dict[str, Any]) -> float:
        value = payload.get("confidence")
        if isinstance(value, (int, float)) and 0.0 <= float(value) <= 1.0:
            return float(value)
        return 1.0

    # -- capabilities ----------------------------------------------------

    def extract(self, question: str, documents: Sequence[str]) -> ExtractResult:
        joined = "\n---\n".join(documents)
        prompt = self._render(Capability.EXTRACT, question=question, documents=joined)
        payload = self._call(
            Capability.EXTRACT, prompt, {"question": question, "documents": list(documents)}
        )
        result = payload["result"]
        answer = str(result.get("answer", "")).strip()
        found = bool(result.get("found", answer != "" and answer != NOT_FOUND_TEXT))
        if not found or not answer:
            return ExtractResult(NOT_FOUND_TEXT, False, 0.0)
        return ExtractResult(answer, True, self._confidence(payload))

    def rank(self, query: str, documents: Sequence[str], k: int) -> list[tuple[int, float]]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not documents:
            return []
        numbered = "\n".join(f"{i + 1}. {doc}" for i, doc in enumerate(documents))
        prompt = self._render(Capability.RANK, query=query, documents=numbered)
        payload = self._call(
            Capability.RANK, prompt, {"query": query, "documents": list(documents)}
        )
        scores = payload["result"].get("scores")
        if not isinstance(scores, list) or len(scores) != len(documents):
            raise GatewayError("backend rank scores do not align with documents")
        pairs = [(i, float(s)) for i, s in enumerate(scores)]
        pairs.sort(key=lambda pair: (-pair[1], pair[0]))
        return pairs[:k]

    def translate(self, text: str, from_lang: str, to_lang: str) -> TranslationResult:
        if to_lang not in self._languages:
            raise UnsupportedLanguage(to_lang)
        if from_lang != AUTO and from_lang not in self._languages:
            raise UnsupportedLanguage(from_lang)
        if from_lang == to_lang:
            return TranslationResult(text, from_lang)
        prompt = self._render(
            Capability.TRANSLATE, text=text, from_lang=from_lang, to_lang=to_lang
        )
        payload = self._call(
            Capability.TRANSLATE,
            prompt,
            {"text": text, "from_lang": from_lang, "to_lang": to_lang},
        )
        result = payload["result"]
        detected = str(result.get("detected_lang", from_lang if from_lang != AUTO else "en"))
        return TranslationResult(str(result.get("text", text)), detected)

    def sentiment(self, text: str) -> Sentiment:
        prompt = self._render(Capability.SENTIMENT, text=text)
        payload = self._call(Capability.SENTIMENT, prompt, {"text": text})
        label = str(payload["result"].get("label", "")).upper()
        try:
            return Sentiment(label)
        except ValueError:
            raise GatewayError(f"backend returned unknown sentiment label {label!r}") from None
