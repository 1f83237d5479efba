"""Deterministic gateway backend for offline use and tests.

No network, no randomness: extraction is label-pattern matching over the
documents, ranking is normalized token overlap, translation is a bundled
bilingual sentence dictionary, and sentiment is a word lexicon.  Every
capability is a pure function of its inputs.  This backend exists so the
whole pipeline can run and be tested without a hosted model; it is not a
production extractor.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from ..model import NOT_FOUND_TEXT
from ..textutil import content_tokens, overlap_score
from . import (
    AUTO,
    Capability,
    ExtractResult,
    Sentiment,
    TranslationResult,
    UnsupportedLanguage,
)

# A captured field value runs from the colon to the first sentence-ending
# period (one followed by whitespace or end of text), so dotted values like
# email addresses survive intact.
_VALUE_PATTERN = r"\s*:\s*(.+?)(?:\.(?=\s|$)|$)"

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class _Target:
    """One extractable field: how to spot it in a question and in a doc."""

    name: str
    question_res: tuple[str, ...]
    label_res: tuple[str, ...]
    template: str | None = None


# Order matters: the first target whose question pattern matches wins, so
# specific fields (TA office hours) sit above generic ones (class times).
_TARGETS: tuple[_Target, ...] = (
    _Target(
        "ta_office_hours",
        (r"(?:\bta\b|teaching assistant).{0,40}office hour", r"office hour.{0,40}(?:\bta\b|teaching assistant)"),
        (r"ta office hours?", r"teaching assistant office hours?"),
        "The TA's office hours are {value}.",
    ),
    _Target(
        "instructor_office_hours",
        (r"office hours?",),
        (r"instructor'?s? office hours?", r"professor'?s? office hours?", r"(?<!ta )office hours?"),
        "The instructor's office hours are {value}.",
    ),
    _Target(
        "ta_office",
        (r"(?:\bta\b|teaching assistant).{0,40}office", r"office.{0,40}(?:\bta\b|teaching assistant)"),
        (r"ta office(?!\s*hours?)", r"teaching assistant office(?!\s*hours?)"),
        "The TA's office is {value}.",
    ),
    _Target(
        "instructor_office",
        (r"(?:instructor|professor).{0,40}office", r"office.{0,40}(?:instructor|professor)", r"\boffice\b"),
        (
            r"instructor'?s? office(?!\s*hours?)",
            r"professor'?s? office(?!\s*hours?)",
            r"(?<!ta )\boffice(?!\s*hours?)",
        ),
        "The instructor's office is {value}.",
    ),
    _Target(
        "ta_contact",
        (
            r"contact.{0,40}(?:\bta\b|teaching assistant)",
            r"(?:\bta\b|teaching assistant).{0,40}(?:contact|email|reach|get in touch)",
            r"(?:reach|get in touch with).{0,20}(?:\bta\b|teaching assistant)",
        ),
        (r"ta contact(?: information)?", r"teaching assistant contact(?: information)?", r"ta email"),
        "You can contact the TA at {value}.",
    ),
    _Target(
        "ta_name",
        (
            r"(?:name|who).{0,50}(?:\bta\b|teaching assistant)",
            r"(?:\bta\b|teaching assistant).{0,40}name",
            r"who is the ta\b",
        ),
        (r"ta name", r"teaching assistant name", r"teaching assistant", r"\bta\b"),
        "The TA is {value}.",
    ),
    _Target(
        "instructor_contact",
        (r"contact", r"email", r"get in touch", r"\breach\b"),
        (
            r"instructor contact(?: information)?",
            r"professor contact(?: information)?",
            r"instructor email",
            r"contact information",
            r"\bemail\b",
        ),
        "You can contact the instructor at {value}.",
    ),
    _Target(
        "instructor_name",
        (
            r"(?:name|who).{0,50}(?:instructor|professor)",
            r"(?:instructor|professor).{0,30}name",
        ),
        (r"instructor name", r"professor name", r"\binstructor\b", r"\bprofessor\b"),
        "The instructor is {value}.",
    ),
    _Target(
        "final_exam",
        (r"final exam",),
        (r"final exam(?:ination)?",),
        "The final exam is {value}.",
    ),
    _Target(
        "exam_count",
        (r"how many (?:exams?|tests?|midterms?)",),
        (r"number of exams?",),
        "This course has {value} exams.",
    ),
    _Target(
        "exam_schedule",
        (r"\bexams?\b", r"\bmidterms?\b"),
        (r"(?:tentative )?exam schedule", r"exam dates?", r"\bexams\b"),
        "The exams are {value}.",
    ),
    _Target(
        "makeup_policy",
        (r"make-?up",),
        (r"make-?up polic(?:y|ies)", r"make-?up"),
    ),
    _Target(
        "late_assignments",
        (r"\blate\b", r"after the deadline", r"miss(?:ed)?.{0,20}deadline"),
        (r"late assignments?", r"late work", r"late polic(?:y|ies)"),
    ),
    _Target(
        "assignment_submission",
        (r"submit", r"submission", r"turn in"),
        (r"assignment submission", r"submitting assignments?", r"\bsubmission\b"),
    ),
    _Target(
        "due_dates",
        (r"\bdue\b", r"deadline"),
        (r"(?:assignment )?due dates?", r"assignments? due"),
        "Assignments are due {value}.",
    ),
    _Target(
        "release_dates",
        (r"released?", r"available", r"handed out"),
        (r"(?:assignment )?release dates?", r"assignment dates?", r"assignments? released"),
        "Assignments are released {value}.",
    ),
    _Target(
        "holy_days",
        (r"holy day", r"religious"),
        (r"(?:absences for )?religious holy days?", r"holy days?", r"religious observances?"),
    ),
    _Target(
        "attendance_policy",
        (r"attendance", r"\battend\b"),
        (r"attendance polic(?:y|ies)", r"attendance"),
    ),
    _Target(
        "classroom_behavior",
        (r"behaviou?r", r"behave", r"conduct", r"classroom"),
        (r"(?:expected )?classroom behaviou?r", r"classroom conduct"),
    ),
    _Target(
        "free_speech",
        (r"free speech", r"freedom of speech", r"expression"),
        (r"freedom of speech", r"free speech(?: and expression)?"),
    ),
    _Target(
        "academic_dishonesty",
        (r"cheat", r"dishonest", r"academic integrity", r"misconduct", r"plagiar"),
        (r"academic dishonesty", r"academic integrity", r"cheating"),
    ),
    _Target(
        "disability",
        (r"disabilit", r"accommodations?\b"),
        (r"disability statement", r"disabilit(?:y|ies)", r"accommodations?"),
    ),
    _Target(
        "mental_health",
        (r"mental health",),
        (r"mental health resources?", r"mental health"),
    ),
    _Target(
        "grading_criteria",
        (r"\bgrading\b", r"\bgraded?\b", r"\bgrades?\b"),
        (r"grading criteria", r"grading breakdown", r"grading polic(?:y|ies)", r"\bgrading\b"),
    ),
    _Target(
        "textbook",
        (r"textbook", r"\bbooks?\b"),
        (r"(?:required )?textbooks?",),
        "The textbook is {value}.",
    ),
    _Target(
        "other_materials",
        (r"materials",),
        (r"other (?:required )?materials?", r"additional materials?", r"\bmaterials\b"),
    ),
    _Target(
        "credit_hours",
        (r"credit",),
        (r"credit hours?", r"\bcredits\b"),
        "This course is worth {value} credit hours.",
    ),
    _Target(
        "course_number",
        (r"\bnumber\b", r"course id", r"course code"),
        (r"course number", r"course code", r"course\s*#"),
        "The course number is {value}.",
    ),
    _Target(
        "course_name",
        (r"\bname\b", r"\btitle\b", r"\bcalled\b"),
        (r"course name", r"course title", r"\btitle\b"),
        "The course name is {value}.",
    ),
    _Target(
        "prerequisites",
        (r"pre-?requisite", r"co-?requisite", r"prereq"),
        (r"pre-?requisites?(?:\s*/\s*co-?requisites?)?", r"co-?requisites?"),
        "The prerequisites are {value}.",
    ),
    _Target(
        "objectives",
        (r"objectives?", r"goals?", r"trying to achieve"),
        (r"course objectives?", r"\bobjectives?\b", r"course goals?", r"\bgoals?\b"),
    ),
    _Target(
        "expectations",
        (r"expectations?", r"expected", r"anticipate"),
        (r"course expectations?", r"\bexpectations?\b"),
    ),
    _Target(
        "lecture_location",
        (r"\bwhere\b", r"location", r"\bheld\b", r"\broom\b", r"\bmeet\b"),
        (r"lecture location", r"class location", r"\blocation\b"),
        "The lecture is held in {value}.",
    ),
    _Target(
        "class_times",
        (r"\btimes?\b", r"\bwhen\b", r"schedule"),
        (r"class times?", r"lecture times?", r"class schedule", r"\btimes?\b"),
        "The class meets {value}.",
    ),
)

# Generic sentence fallback (used only when no target matches the question)
# requires this fraction of the question's content tokens in one sentence.
_FALLBACK_COVERAGE = 0.5


def _finish_sentence(text: str) -> str:
    text = text.strip()
    if text and text[-1] not in ".!?":
        text += "."
    return text


class ReferenceGateway:
    """The bundled deterministic backend."""

    name = "reference"

    def __init__(self, data_dir: str | Path | None = None) -> None:
        if data_dir is None:
            root = resources.files("virtualta.data")
            lexicon = json.loads(root.joinpath("sentiment_lexicon.json").read_text("utf-8"))
            translations = json.loads(root.joinpath("translations.json").read_text("utf-8"))
        else:
            root = Path(data_dir)
            lexicon = json.loads((root / "sentiment_lexicon.json").read_text("utf-8"))
            translations = json.loads((root / "translations.json").read_text("utf-8"))
        self._negative = frozenset(lexicon["negative"])
        self._positive = frozenset(lexicon["positive"])
        self._languages = frozenset(translations["languages"])
        # sentence -> entry, per language, keyed case-insensitively
        self._by_lang: dict[str, dict[str, dict[str, str]]] = {
            lang: {} for lang in self._languages
        }
        for entry in translations["entries"]:
            for lang, sentence in entry.items():
                if lang in self._by_lang:
                    self._by_lang[lang][self._key(sentence)] = entry

    @staticmethod
    def _key(sentence: str) -> str:
        return sentence.strip().casefold()

    def capabilities(self) -> frozenset[Capability]:
        return frozenset(Capability)

    def supported_languages(self) -> frozenset[str]:
        return self._languages

    # -- extraction ----------------------------------------------------

    def extract(self, question: str, documents: Sequence[str]) -> ExtractResult:
        docs = [d for d in documents if d.strip()]
        if not docs or not question.strip():
            return ExtractResult(NOT_FOUND_TEXT, False, 0.0)

        target = self._infer_target(question)
        if target is not None:
            found = self._extract_labeled(target, docs)
            if found is not None:
                value, doc = found
                answer = self._apply_template(target, value, docs)
                return ExtractResult(answer, True, overlap_score(question, doc))
            return ExtractResult(NOT_FOUND_TEXT, False, 0.0)

        best: tuple[float, str] | None = None
        for doc in docs:
            for sentence in _SENTENCE_SPLIT.split(doc):
                score = overlap_score(question, sentence)
                if best is None or score > best[0]:
                    best = (score, sentence)
        if best is not None and best[0] >= _FALLBACK_COVERAGE:
            return ExtractResult(_finish_sentence(best[1]), True, best[0])
        return ExtractResult(NOT_FOUND_TEXT, False, 0.0)

    @staticmethod
    def _infer_target(question: str) -> _Target | None:
        q = question.lower()
        for target in _TARGETS:
            for pattern in target.question_res:
                if re.search(pattern, q):
                    return target
        return None

    @staticmethod
    def _extract_labeled(target: _Target, docs: Sequence[str]) -> tuple[str, str] | None:
        for label in target.label_res:
            pattern = re.compile(label + _VALUE_PATTERN, re.IGNORECASE)
            for doc in docs:
                match = pattern.search(doc)
                if match and match.group(1).strip():
                    return match.group(1).strip(), doc
        return None

    @staticmethod
    def _apply_template(target: _Target, value: str, docs: Sequence[str]) -> str:
        """Wrap the value in the target's sentence template when safe.

        Safe means every scaffold word already occurs in the documents (the
        no-fabrication rule) and none of them occurs in the value itself
        (otherwise a sentence-shaped value would get double-wrapped).
        """
        if target.template is not None:
            scaffold = content_tokens(target.template.replace("{value}", " "))
            available = set().union(*(content_tokens(d) for d in docs))
            if scaffold <= available and not scaffold & content_tokens(value):
                return _finish_sentence(target.template.format(value=value))
        return _finish_sentence(value)

    # -- ranking -------------------------------------------------------

    def rank(self, query: str, documents: Sequence[str], k: int) -> list[tuple[int, float]]:
        if k < 1:
            raise ValueError("k must be >= 1")
        scored = [(i, overlap_score(query, doc)) for i, doc in enumerate(documents)]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:k]

    # -- translation ---------------------------------------------------

    def translate(self, text: str, from_lang: str, to_lang: str) -> TranslationResult:
        if to_lang not in self._languages:
            raise UnsupportedLanguage(to_lang)
        if from_lang != AUTO and from_lang not in self._languages:
            raise UnsupportedLanguage(from_lang)

        detected = from_lang
        entry = None
        if from_lang == AUTO:
            detected = "en"
            for lang in sorted(self._languages):
                hit = self._by_lang[lang].get(self._key(text))
                if hit is not None:
                    detected, entry = lang, hit
                    break
        else:
            entry = self._by_lang[from_lang].get(self._key(text))

        if detected == to_lang:
            return TranslationResult(text, detected)
        if entry is not None and to_lang in entry:
            return TranslationResult(entry[to_lang], detected)
        # Unknown sentence: pass through unchanged rather than fail, so the
        # pipeline degrades to English-only instead of erroring.
        return TranslationResult(text, detected)

    # -- sentiment -----------------------------------------------------

    def sentiment(self, text: str) -> Sentiment:
        words = set(re.findall(r"[a-z']+", text.lower()))
        if words & self._negative:
            return Sentiment.NEGATIVE
        if words & self._positive:
            return Sentiment.POSITIVE
        return Sentiment.NEUTRAL
