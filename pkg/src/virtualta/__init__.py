"""VirtualTA: course-specific teaching-assistant chatbots from syllabi.

The pipeline: ingest a syllabus, draft a knowledge model by asking a fixed
competency-question bank against it, let the instructor verify or correct
every line, publish, and then answer student questions from the published
model with a document-extraction fallback.  Ships with a deterministic
reference language-model backend, an HTTP backend, an evaluation harness,
an HTTP service, and a CLI (``vta``).
"""

from .bank import CompetencyQuestion, PhaseTag, QuestionBank, load_question_bank
from .config import AppConfig, load_config
from .errors import (
    BankLoadError,
    ConfigError,
    EmptySyllabusError,
    EvaluationError,
    JsonlParseError,
    PublishError,
    ReviewError,
    VirtualTAError,
)
from .gateway import (
    AUTO,
    Capability,
    ExtractResult,
    GatewayError,
    GatewayUnavailable,
    LanguageModelGateway,
    PayloadTooLarge,
    Sentiment,
    TranslationResult,
    UnsupportedLanguage,
)
from .gateway.http import HttpGateway
from .gateway.reference import ReferenceGateway
from .generate import generate_draft_model
from .ingest import (
    DocumentChunk,
    SyllabusDocument,
    chunk_document,
    chunk_text,
    normalize_text,
)
from .model import (
    NOT_FOUND_TEXT,
    PLACEHOLDER,
    KnowledgeEntry,
    KnowledgeModel,
    ReviewDecision,
    Verdict,
    apply_review,
    parse_model_jsonl,
    require_publishable,
    serialize_model_jsonl,
)
from .qa import Answer, AnswerSource, QAEngine, Question, ResponseTemplates
from .registry import ModelRegistry, PublishedModel
from .schema import SYLLABUS_SCHEMA, Category, SchemaElement, elements_for, get_element

__version__ = "0.1.0"

__all__ = [
    "AUTO",
    "Answer",
    "AnswerSource",
    "AppConfig",
    "BankLoadError",
    "Capability",
    "Category",
    "CompetencyQuestion",
    "ConfigError",
    "DocumentChunk",
    "EmptySyllabusError",
    "EvaluationError",
    "ExtractResult",
    "GatewayError",
    "GatewayUnavailable",
    "HttpGateway",
    "JsonlParseError",
    "KnowledgeEntry",
    "KnowledgeModel",
    "LanguageModelGateway",
    "ModelRegistry",
    "NOT_FOUND_TEXT",
    "PLACEHOLDER",
    "PayloadTooLarge",
    "PhaseTag",
    "PublishError",
    "PublishedModel",
    "QAEngine",
    "Question",
    "QuestionBank",
    "ReferenceGateway",
    "ResponseTemplates",
    "ReviewDecision",
    "ReviewError",
    "SYLLABUS_SCHEMA",
    "SchemaElement",
    "Sentiment",
    "SyllabusDocument",
    "TranslationResult",
    "UnsupportedLanguage",
    "Verdict",
    "VirtualTAError",
    "apply_review",
    "chunk_document",
    "chunk_text",
    "elements_for",
    "generate_draft_model",
    "get_element",
    "load_config",
    "load_question_bank",
    "normalize_text",
    "parse_model_jsonl",
    "require_publishable",
    "serialize_model_jsonl",
]
