"""Shared fixtures: the BUS 100 course in every stage of its lifecycle."""

from __future__ import annotations

from pathlib import Path

import pytest

from virtualta.bank import QuestionBank, load_question_bank
from virtualta.gateway.reference import ReferenceGateway
from virtualta.generate import generate_draft_model
from virtualta.ingest import SyllabusDocument, chunk_document
from virtualta.model import (
    KnowledgeModel,
    ReviewDecision,
    Verdict,
    apply_review,
    serialize_model_jsonl,
)
from virtualta.qa import QAEngine
from virtualta.registry import ModelRegistry, PublishedModel

FIXTURES = Path(__file__).parent / "fixtures"

# The two scripted corrections used everywhere a review happens: the exam
# count is absent from the syllabus (FALSE plus a correction drawn from the
# grading line) and the materials answer is judged incomplete (PARTIAL).
FALSE_QUESTION = "How many exams does this course have?"
FALSE_CORRECTION = "Three exams."
PARTIAL_QUESTION = "What are the other materials this course uses?"


@pytest.fixture(scope="session")
def bank() -> QuestionBank:
    return load_question_bank()


@pytest.fixture(scope="session")
def gateway() -> ReferenceGateway:
    return ReferenceGateway()


@pytest.fixture(scope="session")
def bus100_text() -> str:
    return (FIXTURES / "bus100.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def bus100_chunks(bus100_text):
    doc = SyllabusDocument(course_id="bus100", raw_text=bus100_text)
    return chunk_document(doc)


@pytest.fixture(scope="session")
def bus100_draft(bus100_chunks, bank, gateway) -> KnowledgeModel:
    return generate_draft_model(bus100_chunks, bank, gateway)


def review_decisions(draft: KnowledgeModel) -> dict[str, ReviewDecision]:
    """The scripted instructor pass over a BUS 100 draft."""
    decisions: dict[str, ReviewDecision] = {}
    for entry in draft.entries:
        if entry.question == FALSE_QUESTION:
            decisions[entry.question] = ReviewDecision(Verdict.FALSE, FALSE_CORRECTION)
        elif entry.question == PARTIAL_QUESTION:
            decisions[entry.question] = ReviewDecision(Verdict.PARTIAL)
        else:
            decisions[entry.question] = ReviewDecision(Verdict.TRUE)
    return decisions


def reviewed_jsonl(draft: KnowledgeModel) -> str:
    """The corrected JSONL body an instructor would PUT back."""
    return serialize_model_jsonl(apply_review(draft, review_decisions(draft)))


@pytest.fixture(scope="session")
def bus100_reviewed(bus100_draft) -> KnowledgeModel:
    return apply_review(bus100_draft, review_decisions(bus100_draft))


@pytest.fixture(scope="session")
def bus100_published(bus100_reviewed) -> PublishedModel:
    return ModelRegistry().publish("bus100", bus100_reviewed)


@pytest.fixture()
def engine(gateway, bank) -> QAEngine:
    return QAEngine(gateway, bank)
