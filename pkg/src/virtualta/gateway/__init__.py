"""Language-model gateway: capability interface plus shared result types.

Two implementations ship with the package: a fully deterministic reference
backend for offline use and tests (`reference.ReferenceGateway`), and a
JSON-over-HTTP client for hosted completion models (`http.HttpGateway`).
Everything above this layer talks to the `LanguageModelGateway` protocol
and never to a provider SDK.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence, runtime_checkable

from ..errors import VirtualTAError

AUTO = "auto"


class Capability(str, Enum):
    EXTRACT = "EXTRACT"
    RANK = "RANK"
    TRANSLATE = "TRANSLATE"
    SENTIMENT = "SENTIMENT"


class Sentiment(str, Enum):
    NEGATIVE = "NEGATIVE"
    NEUTRAL = "NEUTRAL"
    POSITIVE = "POSITIVE"


@dataclass(frozen=True)
class GatewayLimits:
    """Cost-control budget applied to each gateway call."""

    max_payload_chars: int = 20_000
    max_latency_s: float = 30.0


@dataclass(frozen=True)
class ExtractResult:
    """Outcome of an extraction call.

    ``found`` false means the backend declined to answer; ``answer`` then
    holds the reserved not-found sentinel, never a guess.
    """

    answer: str
    found: bool
    confidence: float


@dataclass(frozen=True)
class TranslationResult:
    text: str
    detected_lang: str


class GatewayError(VirtualTAError):
    """Base class for gateway failures (distinct from found=false)."""


class GatewayUnavailable(GatewayError):
    """Remote backend unreachable after retries; caller degrades."""


class UnsupportedLanguage(GatewayError):
    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"unsupported language tag: {tag!r}")


class PayloadTooLarge(GatewayError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"payload of {size} chars exceeds budget of {limit}")


@runtime_checkable
class LanguageModelGateway(Protocol):
    """The four capabilities the rest of the system relies on.

    Implementations must be safely shareable across threads; any per-call
    state stays local to the call.
    """

    name: str

    def capabilities(self) -> frozenset[Capability]: ...

    def extract(self, question: str, documents: Sequence[str]) -> ExtractResult:
        """Answer ``question`` strictly from ``documents`` or decline."""
        ...

    def rank(
        self, query: str, documents: Sequence[str], k: int
    ) -> list[tuple[int, float]]:
        """Top-k (index, score) pairs, score descending, ties by index."""
        ...

    def translate(self, text: str, from_lang: str, to_lang: str) -> TranslationResult:
        """Translate ``text``; ``from_lang`` may be AUTO."""
        ...

    def sentiment(self, text: str) -> Sentiment: ...

    def supported_languages(self) -> frozenset[str]: ...


__all__ = [
    "AUTO",
    "Capability",
    "ExtractResult",
    "GatewayError",
    "GatewayLimits",
    "GatewayUnavailable",
    "LanguageModelGateway",
    "PayloadTooLarge",
    "Sentiment",
    "TranslationResult",
    "UnsupportedLanguage",
]
