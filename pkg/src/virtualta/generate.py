"""Draft knowledge-model generation from syllabus chunks."""

from __future__ import annotations

from typing import Sequence

from .bank import QuestionBank
from .gateway import GatewayError, LanguageModelGateway
from .ingest import DocumentChunk
from .model import NOT_FOUND_TEXT, KnowledgeEntry, KnowledgeModel

DEFAULT_TOP_K = 3


def generate_draft_model(
    chunks: Sequence[DocumentChunk],
    bank: QuestionBank,
    gateway: LanguageModelGateway,
    *,
    top_k: int = DEFAULT_TOP_K,
) -> KnowledgeModel:
    """Ask every canonical bank question against the chunks.

    Produces one entry per canonical question in bank order, all carrying
    the review placeholder.  A gateway failure on one question records the
    not-found sentinel for it and the run continues; generation never
    fabricates and never aborts half-way.
    """
    texts = [c.text for c in chunks]
    entries: list[KnowledgeEntry] = []
    for question in bank.phase1_questions():
        answer = NOT_FOUND_TEXT
        if texts:
            try:
                ranked = gateway.rank(question, texts, top_k)
                docs = [texts[i] for i, _ in ranked]
                result = gateway.extract(question, docs)
                if result.found:
                    answer = result.answer
            except GatewayError:
                answer = NOT_FOUND_TEXT
        entries.append(KnowledgeEntry(question=question, answer=answer))
    return KnowledgeModel(entries=tuple(entries))
