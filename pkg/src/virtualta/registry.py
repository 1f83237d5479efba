"""In-memory registry of published knowledge models, versioned per course."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from .model import KnowledgeModel, require_publishable


@dataclass(frozen=True)
class PublishedModel:
    course_id: str
    version: int
    model: KnowledgeModel


class ModelRegistry:
    """Tracks the published model per course.

    Publishing swaps an immutable snapshot under a lock, so readers never
    observe a half-updated model.  Version numbers start at 1 and increase
    by one per publish within a course.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._current: dict[str, PublishedModel] = {}
        self._history: dict[str, list[PublishedModel]] = {}

    def publish(self, course_id: str, model: KnowledgeModel) -> PublishedModel:
        require_publishable(model)
        with self._lock:
            prior = self._current.get(course_id)
            version = prior.version + 1 if prior else 1
            record = PublishedModel(course_id=course_id, version=version, model=model)
            self._current[course_id] = record
            self._history.setdefault(course_id, []).append(record)
            return record

    def current(self, course_id: str) -> PublishedModel | None:
        with self._lock:
            return self._current.get(course_id)

    def get_version(self, course_id: str, version: int) -> PublishedModel | None:
        with self._lock:
            for record in self._history.get(course_id, ()):
                if record.version == version:
                    return record
        return None

    def versions(self, course_id: str) -> list[int]:
        with self._lock:
            return [r.version for r in self._history.get(course_id, ())]
