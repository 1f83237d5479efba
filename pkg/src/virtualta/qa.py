"""The two-stage question-answering engine.

Stage one matches the incoming question against the published knowledge
model (instructor-verified content wins).  Stage two falls back to ranking
the syllabus chunks and extracting an answer from the top few.  Anything
below threshold becomes the reserved "Response not found", never a guess.
Around that core: translation pivot (ask in Spanish, matched in English,
answered in Spanish), sentiment-aware response composition, and a
transparent TTL/LRU answer cache.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .bank import QuestionBank
from .cache import TTLCache
from .errors import JsonlParseError
from .gateway import (
    AUTO,
    GatewayError,
    LanguageModelGateway,
    Sentiment,
    UnsupportedLanguage,
)
from .ingest import DocumentChunk
from .model import NOT_FOUND_TEXT, KnowledgeEntry, KnowledgeModel, Verdict
from .registry import PublishedModel
from .schema import Category, SchemaElement
from .textutil import jaccard, normalize_question

DEFAULT_TAU_MODEL = 0.5
DEFAULT_TAU_EXTRACT = 0.25
DEFAULT_TOP_K = 3
DEFAULT_CACHE_CAPACITY = 256
DEFAULT_CACHE_TTL_S = 300.0


class AnswerSource(str, Enum):
    KNOWLEDGE_MODEL = "KNOWLEDGE_MODEL"
    CHUNK_FALLBACK = "CHUNK_FALLBACK"
    NOT_FOUND = "NOT_FOUND"


@dataclass(frozen=True)
class Question:
    text: str
    course_id: str
    lang: str = AUTO
    channel: str = "api"
    asked_at: datetime | None = None


@dataclass(frozen=True)
class Answer:
    """What the engine returns for one question.

    ``text`` is the served answer in the question's language; ``found``
    false always pairs with source NOT_FOUND and the (possibly translated)
    sentinel text.  ``latency_s`` is informational and excluded from
    equality checks in tests.
    """

    text: str
    found: bool
    partial_flag: bool
    sentiment: Sentiment
    source: AnswerSource
    matched_element: SchemaElement | None
    model_version: int
    language: str
    degraded: bool = False
    latency_s: float = 0.0


@dataclass(frozen=True)
class ResponseTemplates:
    """Configurable wording for sentiment-gated composition."""

    supportive_prefix: str
    support_pointer: str
    contact_suggestion: str

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ResponseTemplates":
        if path is None:
            text = resources.files("virtualta.data").joinpath(
                "response_templates.json"
            ).read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        raw = json.loads(text)
        return cls(
            supportive_prefix=raw["supportive_prefix"],
            support_pointer=raw["support_pointer"],
            contact_suggestion=raw["contact_suggestion"],
        )


def match_entry(
    question_text: str, model: KnowledgeModel, bank: QuestionBank
) -> tuple[KnowledgeEntry, float] | None:
    """Best model entry for a question, with a [0,1] similarity score.

    Exact membership wins outright: a question that is verbatim (modulo
    normalization) one of a group's wordings matches that group's entry
    even when another group's wording shares the same content tokens.
    Otherwise the highest Jaccard wins, ties keeping the earliest entry.
    """
    norm = normalize_question(question_text)
    scored: list[tuple[KnowledgeEntry, tuple[str, ...]]] = []
    for entry in model.entries:
        group = bank.group_for(entry.question)
        texts = group.all_texts() if group else (entry.question,)
        if any(normalize_question(t) == norm for t in texts):
            return (entry, 1.0)
        scored.append((entry, texts))

    best: tuple[KnowledgeEntry, float] | None = None
    for entry, texts in scored:
        score = max(jaccard(question_text, t) for t in texts)
        if best is None or score > best[1]:
            best = (entry, score)
    return best


def find_support_resources(model: KnowledgeModel, bank: QuestionBank) -> str | None:
    """The served Mental Health Resources answer, if the model has one."""
    for entry in model.entries:
        group = bank.group_for(entry.question)
        if group is None or entry.answer == NOT_FOUND_TEXT:
            continue
        element = group.element
        if element.category is Category.POLICIES and element.element_key == "Mental Health Resources":
            return entry.answer
    return None


def compose_response(
    answer: Answer,
    templates: ResponseTemplates,
    support_text: str | None = None,
) -> str:
    """Final message for delivery: verbatim unless the asker sounded distressed."""
    if answer.sentiment is not Sentiment.NEGATIVE:
        return answer.text
    parts = [templates.supportive_prefix, answer.text]
    if answer.found:
        if support_text:
            parts.append(templates.support_pointer.format(resources=support_text))
    else:
        parts.append(templates.contact_suggestion)
    return " ".join(parts)


class QAEngine:
    """Stateless pipeline plus one internal answer cache.

    Safe for concurrent use: the published model snapshot is immutable,
    gateway implementations are shareable, and the cache synchronizes
    internally.  Correctness never depends on a cache hit.
    """

    def __init__(
        self,
        gateway: LanguageModelGateway,
        bank: QuestionBank,
        *,
        tau_model: float = DEFAULT_TAU_MODEL,
        tau_extract: float = DEFAULT_TAU_EXTRACT,
        top_k: int = DEFAULT_TOP_K,
        cache_capacity: int = DEFAULT_CACHE_CAPACITY,
        cache_ttl_s: float = DEFAULT_CACHE_TTL_S,
        templates: ResponseTemplates | None = None,
    ) -> None:
        self.gateway = gateway
        self.bank = bank
        self.tau_model = tau_model
        self.tau_extract = tau_extract
        self.top_k = top_k
        self.templates = templates or ResponseTemplates.load()
        self._cache: TTLCache[Answer] | None = (
            TTLCache(cache_capacity, cache_ttl_s) if cache_capacity > 0 else None
        )

    @property
    def cache_stats(self) -> tuple[int, int]:
        return self._cache.stats if self._cache else (0, 0)

    def answer_question(
        self,
        q: Question,
        published: PublishedModel,
        chunks: Sequence[DocumentChunk] = (),
    ) -> Answer:
        text = q.text.strip()
        if not text:
            raise ValueError("question text must be non-empty")
        started = time.perf_counter()
        lang = q.lang or AUTO

        cache_key = (q.course_id, published.version, normalize_question(text), lang)
        if self._cache is not None:
            hit = self._cache.get(cache_key)
            if hit is not None:
                return hit

        degraded = False

        # (1) pivot to English
        english, resolved = text, "en"
        if lang != "en":
            try:
                translated = self.gateway.translate(text, lang, "en")
                english = translated.text
                resolved = translated.detected_lang if lang == AUTO else lang
            except UnsupportedLanguage:
                pass  # serve English-only
            except GatewayError:
                degraded = True

        try:
            sentiment = self.gateway.sentiment(english)
        except GatewayError:
            sentiment = Sentiment.NEUTRAL
            degraded = True

        # (2) knowledge-model match, (3) chunk fallback
        source = AnswerSource.NOT_FOUND
        answer_en = NOT_FOUND_TEXT
        partial = False
        element: SchemaElement | None = None

        matched = match_entry(english, published.model, self.bank)
        if matched is not None and matched[1] >= self.tau_model:
            entry = matched[0]
            if entry.answer != NOT_FOUND_TEXT:
                source = AnswerSource.KNOWLEDGE_MODEL
                answer_en = entry.answer
                partial = entry.verification is Verdict.PARTIAL
                group = self.bank.group_for(entry.question)
                element = group.element if group else None

        if source is AnswerSource.NOT_FOUND and chunks:
            try:
                texts = [c.text for c in chunks]
                ranked = self.gateway.rank(english, texts, self.top_k)
                docs = [texts[i] for i, score in ranked if score > 0.0]
                if docs:
                    result = self.gateway.extract(english, docs)
                    if result.found and result.confidence >= self.tau_extract:
                        source = AnswerSource.CHUNK_FALLBACK
                        answer_en = result.answer
                        group = self.bank.group_for(english)
                        element = group.element if group else None
            except GatewayError:
                degraded = True

        found = source is not AnswerSource.NOT_FOUND

        # (4) translate the answer back to the asker's language
        final_text = answer_en
        if resolved != "en":
            try:
                final_text = self.gateway.translate(answer_en, "en", resolved).text
            except GatewayError:
                final_text = answer_en

        answer = Answer(
            text=final_text,
            found=found,
            partial_flag=partial,
            sentiment=sentiment,
            source=source,
            matched_element=element,
            model_version=published.version,
            language=resolved,
            degraded=degraded,
            latency_s=time.perf_counter() - started,
        )
        if self._cache is not None:
            self._cache.put(cache_key, answer)
        return answer

    def compose(self, answer: Answer, published: PublishedModel) -> str:
        support = find_support_resources(published.model, self.bank)
        return compose_response(answer, self.templates, support)


# -- fine-tune export ------------------------------------------------------


@dataclass(frozen=True)
class FinetuneRecord:
    question: str
    served_answer: str
    found: bool


def export_finetune_jsonl(records: Iterable[FinetuneRecord]) -> str:
    """One JSONL line per logged turn, chronological; UTF-8, LF lines."""
    lines = []
    for record in records:
        lines.append(
            json.dumps(
                {
                    "question": record.question,
                    "served_answer": record.served_answer,
                    "found": record.found,
                },
                separators=(",", ":"),
                ensure_ascii=False,
            )
        )
    return "".join(line + "\n" for line in lines)


def parse_finetune_jsonl(text: str) -> list[FinetuneRecord]:
    records: list[FinetuneRecord] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise JsonlParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
        try:
            records.append(
                FinetuneRecord(
                    question=str(raw["question"]),
                    served_answer=str(raw["served_answer"]),
                    found=bool(raw["found"]),
                )
            )
        except (KeyError, TypeError):
            raise JsonlParseError("missing question/served_answer/found", line=lineno) from None
    return records
