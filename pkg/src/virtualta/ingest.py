"""Syllabus ingestion: normalization and word-safe chunking.

A syllabus enters the system as plain UTF-8 text, is normalized to a single
whitespace-collapsed line, and is then split into retrieval documents of at
most ``max_chars`` characters (200 by default) without breaking words.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Protocol

from .errors import EmptySyllabusError

DEFAULT_MAX_CHARS = 200

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class SyllabusDocument:
    """A raw syllabus attached to a course."""

    course_id: str
    raw_text: str
    source_name: str = ""
    ingested_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


@dataclass(frozen=True)
class DocumentChunk:
    """One retrieval unit: a word-safe slice of the normalized text."""

    chunk_id: int
    text: str
    char_span: tuple[int, int]


class TextExtractor(Protocol):
    """Optional pre-step turning a stored file into plain text."""

    def extract(self, data: bytes, name: str = "") -> str: ...


class PlainTextExtractor:
    """The only extractor shipped: decodes UTF-8 text files."""

    def extract(self, data: bytes, name: str = "") -> str:
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EmptySyllabusError(f"{name or 'input'} is not valid UTF-8 text") from exc


def normalize_text(raw: str) -> str:
    """Normalize raw syllabus text.

    Applies Unicode NFC, collapses every whitespace run (including CR/LF) to
    a single space, removes remaining control/format characters, and trims.
    Raises EmptySyllabusError if nothing is left.
    """
    text = unicodedata.normalize("NFC", raw)
    text = _WS_RE.sub(" ", text)
    text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("C"))
    text = _WS_RE.sub(" ", text).strip()
    if not text:
        raise EmptySyllabusError("syllabus text is empty after normalization")
    return text


def chunk_text(text: str, max_chars: int = DEFAULT_MAX_CHARS) -> list[DocumentChunk]:
    """Greedy left-to-right packing of whole words into <=max_chars chunks.

    Words never straddle a chunk boundary; the one exception is a single
    word longer than max_chars, which is hard-split at max_chars boundaries
    (long URLs would otherwise make the input unchunkable).
    """
    if max_chars < 1:
        raise ValueError("max_chars must be >= 1")

    chunks: list[DocumentChunk] = []
    current: list[str] = []
    current_len = 0
    current_start = 0

    def flush(end: int) -> None:
        nonlocal current, current_len
        if current:
            chunks.append(DocumentChunk(len(chunks), " ".join(current), (current_start, end)))
            current = []
            current_len = 0

    pos = 0
    for word in text.split(" "):
        start = pos
        end = pos + len(word)
        pos = end + 1
        if not word:
            continue
        if len(word) > max_chars:
            flush(start - 1)
            for off in range(0, len(word), max_chars):
                piece = word[off : off + max_chars]
                chunks.append(
                    DocumentChunk(len(chunks), piece, (start + off, start + off + len(piece)))
                )
            continue
        if current and current_len + 1 + len(word) > max_chars:
            flush(start - 1)
        if not current:
            current_start = start
        current.append(word)
        current_len += len(word) + (1 if current_len else 0)
    flush(len(text))
    return chunks


def chunk_document(doc: SyllabusDocument, max_chars: int = DEFAULT_MAX_CHARS) -> list[DocumentChunk]:
    """Normalize a syllabus document and chunk it in one step."""
    return chunk_text(normalize_text(doc.raw_text), max_chars)
