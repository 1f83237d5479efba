"""Exception hierarchy shared across the package."""

from __future__ import annotations


class VirtualTAError(Exception):
    """Base class for all errors raised by this package."""


class EmptySyllabusError(VirtualTAError):
    """Raised when a syllabus contains no usable text after normalization."""


class BankLoadError(VirtualTAError):
    """Raised when the question-bank file is malformed or inconsistent."""

    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class JsonlParseError(VirtualTAError):
    """Raised when a knowledge-model JSONL stream is malformed."""

    def __init__(self, message: str, *, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ReviewError(VirtualTAError):
    """Raised when a review edit set cannot be applied."""

    def __init__(self, message: str, *, questions: list[str] | None = None):
        self.questions = questions or []
        super().__init__(message)


class PublishError(VirtualTAError):
    """Raised when a model cannot be published (unreviewed entries remain)."""

    def __init__(self, message: str, *, questions: list[str] | None = None):
        self.questions = questions or []
        super().__init__(message)


class EvaluationError(VirtualTAError):
    """Raised by the evaluation harness on unusable inputs."""


class ConfigError(VirtualTAError):
    """Raised on invalid configuration values or unknown keys."""
