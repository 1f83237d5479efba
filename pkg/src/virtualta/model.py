"""Knowledge model entries, JSONL serialization, and the review workflow.

A knowledge model is an ordered list of question/answer pairs with a
verification flag.  Drafts carry a placeholder flag; instructors replace it
with TRUE, FALSE, or PARTIAL, supplying a corrected answer for FALSE
entries.  The on-disk form is JSONL with one compact object per line:

    {"QUESTION":"...","ANSWER":"...","isTrue":"..."}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping

from .errors import JsonlParseError, PublishError, ReviewError

PLACEHOLDER = "Change this to TRUE or FALSE or PARTIAL"
NOT_FOUND_TEXT = "Response not found"

_KEYS = ("QUESTION", "ANSWER", "isTrue")


class Verdict(str, Enum):
    """Instructor judgment of a drafted answer."""

    TRUE = "TRUE"
    FALSE = "FALSE"
    PARTIAL = "PARTIAL"


@dataclass(frozen=True)
class KnowledgeEntry:
    """One reviewed or draft line of a knowledge model.

    ``verification`` is None while the entry awaits review.  For FALSE
    entries ``answer`` already holds the instructor's correction; the
    original draft answer is not retained.
    """

    question: str
    answer: str
    verification: Verdict | None = None

    @property
    def is_reviewed(self) -> bool:
        return self.verification is not None

    def flag_text(self) -> str:
        return self.verification.value if self.verification else PLACEHOLDER


@dataclass(frozen=True)
class KnowledgeModel:
    entries: tuple[KnowledgeEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def unreviewed_questions(self) -> list[str]:
        return [e.question for e in self.entries if not e.is_reviewed]

    def entry_for(self, question: str) -> KnowledgeEntry | None:
        for entry in self.entries:
            if entry.question == question:
                return entry
        return None


def serialize_entry(entry: KnowledgeEntry) -> str:
    payload = {
        "QUESTION": entry.question,
        "ANSWER": entry.answer,
        "isTrue": entry.flag_text(),
    }
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)


def serialize_model_jsonl(model: KnowledgeModel | Iterable[KnowledgeEntry]) -> str:
    entries = model.entries if isinstance(model, KnowledgeModel) else tuple(model)
    return "".join(serialize_entry(e) + "\n" for e in entries)


def parse_entry_line(line: str, lineno: int) -> KnowledgeEntry:
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise JsonlParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
    if not isinstance(payload, dict):
        raise JsonlParseError("expected a JSON object", line=lineno)
    missing = [k for k in _KEYS if k not in payload]
    if missing:
        raise JsonlParseError(f"missing keys: {', '.join(missing)}", line=lineno)
    extra = [k for k in payload if k not in _KEYS]
    if extra:
        raise JsonlParseError(f"unexpected keys: {', '.join(extra)}", line=lineno)
    question, answer, flag = (payload[k] for k in _KEYS)
    for name, value in (("QUESTION", question), ("ANSWER", answer), ("isTrue", flag)):
        if not isinstance(value, str):
            raise JsonlParseError(f"{name} must be a string", line=lineno)
    if question.strip() == "":
        raise JsonlParseError("QUESTION must not be blank", line=lineno)
    if flag == PLACEHOLDER:
        verification = None
    else:
        try:
            verification = Verdict(flag)
        except ValueError:
            raise JsonlParseError(
                f"isTrue must be TRUE, FALSE, PARTIAL, or the placeholder; got {flag!r}",
                line=lineno,
            ) from None
    return KnowledgeEntry(question=question, answer=answer, verification=verification)


def parse_model_jsonl(text: str) -> KnowledgeModel:
    """Parse JSONL text into a model, reporting 1-based line numbers on error."""
    entries: list[KnowledgeEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() == "":
            continue
        entry = parse_entry_line(line, lineno)
        if entry.question in seen:
            raise JsonlParseError(
                f"duplicate QUESTION {entry.question!r}", line=lineno
            )
        seen.add(entry.question)
        entries.append(entry)
    return KnowledgeModel(entries=tuple(entries))


@dataclass(frozen=True)
class ReviewDecision:
    """Instructor verdict for one question, with a correction when FALSE."""

    verdict: Verdict
    corrected_answer: str | None = None


def apply_review(
    model: KnowledgeModel, decisions: Mapping[str, ReviewDecision]
) -> KnowledgeModel:
    """Return a new model with the given verdicts applied.

    Raises ReviewError when a decision references an unknown question, a
    FALSE verdict lacks a correction, or a non-FALSE verdict carries one.
    """
    known = {e.question for e in model.entries}
    unknown = sorted(q for q in decisions if q not in known)
    if unknown:
        raise ReviewError("decisions reference unknown questions", questions=unknown)

    bad_false = sorted(
        q
        for q, d in decisions.items()
        if d.verdict is Verdict.FALSE
        and (d.corrected_answer is None or d.corrected_answer.strip() == "")
    )
    if bad_false:
        raise ReviewError(
            "FALSE verdicts require a corrected answer", questions=bad_false
        )
    bad_other = sorted(
        q
        for q, d in decisions.items()
        if d.verdict is not Verdict.FALSE and d.corrected_answer is not None
    )
    if bad_other:
        raise ReviewError(
            "only FALSE verdicts may carry a corrected answer", questions=bad_other
        )

    updated: list[KnowledgeEntry] = []
    for entry in model.entries:
        decision = decisions.get(entry.question)
        if decision is None:
            updated.append(entry)
            continue
        answer = entry.answer
        if decision.verdict is Verdict.FALSE:
            assert decision.corrected_answer is not None
            answer = decision.corrected_answer
        updated.append(replace(entry, answer=answer, verification=decision.verdict))
    return KnowledgeModel(entries=tuple(updated))


def require_publishable(model: KnowledgeModel) -> None:
    """Raise PublishError when any entry still has the placeholder flag."""
    pending = model.unreviewed_questions()
    if pending:
        raise PublishError(
            f"{len(pending)} entries still carry the review placeholder",
            questions=pending,
        )
