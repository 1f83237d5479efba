"""Relational persistence behind a small storage facade.

SQLAlchemy Core over SQLite by default (file or in-memory), or any
server-grade engine via a database URL.  The rest of the service never
touches SQL; it calls the methods here.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager, nullcontext
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Sequence

import sqlalchemy as sa
from sqlalchemy.pool import StaticPool

from ..ingest import DocumentChunk

_metadata = sa.MetaData()

users = sa.Table(
    "users",
    _metadata,
    sa.Column("user_id", sa.String, primary_key=True),
    sa.Column("role", sa.String, nullable=False),
    sa.Column("display_name", sa.String, nullable=False, default=""),
    sa.Column("token", sa.String, nullable=False, unique=True),
)

courses = sa.Table(
    "courses",
    _metadata,
    sa.Column("course_id", sa.String, primary_key=True),
    sa.Column("title", sa.String, nullable=False, default=""),
    sa.Column("owner_id", sa.String, sa.ForeignKey("users.user_id"), nullable=False),
    sa.Column("current_version", sa.Integer, nullable=True),
)

drafts = sa.Table(
    "drafts",
    _metadata,
    sa.Column("course_id", sa.String, sa.ForeignKey("courses.course_id"), primary_key=True),
    sa.Column("draft_id", sa.String, nullable=False),
    sa.Column("content_hash", sa.String, nullable=False),
    sa.Column("status", sa.String, nullable=False),  # PENDING | READY | FAILED
    sa.Column("jsonl", sa.Text, nullable=False, default=""),
    sa.Column("error", sa.Text, nullable=True),
)

published_models = sa.Table(
    "published_models",
    _metadata,
    sa.Column("course_id", sa.String, sa.ForeignKey("courses.course_id"), primary_key=True),
    sa.Column("version", sa.Integer, primary_key=True),
    sa.Column("jsonl", sa.Text, nullable=False),
)

chunks_table = sa.Table(
    "chunks",
    _metadata,
    sa.Column("course_id", sa.String, sa.ForeignKey("courses.course_id"), primary_key=True),
    sa.Column("chunk_id", sa.Integer, primary_key=True),
    sa.Column("text", sa.Text, nullable=False),
    sa.Column("span_start", sa.Integer, nullable=False),
    sa.Column("span_end", sa.Integer, nullable=False),
)

turns = sa.Table(
    "turns",
    _metadata,
    sa.Column("turn_id", sa.Integer, primary_key=True, autoincrement=True),
    sa.Column("course_id", sa.String, nullable=False),
    sa.Column("channel_id", sa.String, nullable=False, default=""),
    sa.Column("question", sa.Text, nullable=False),
    sa.Column("served_answer", sa.Text, nullable=False),
    sa.Column("message", sa.Text, nullable=False),
    sa.Column("found", sa.Boolean, nullable=False),
    sa.Column("partial_flag", sa.Boolean, nullable=False),
    sa.Column("sentiment", sa.String, nullable=False),
    sa.Column("model_version", sa.Integer, nullable=False),
    sa.Column("asked_at", sa.String, nullable=False),
)

channels = sa.Table(
    "channels",
    _metadata,
    sa.Column("channel_id", sa.String, primary_key=True),
    sa.Column("course_id", sa.String, sa.ForeignKey("courses.course_id"), nullable=False),
    sa.Column("kind", sa.String, nullable=False),  # WEBHOOK | WEBCHAT | REFERENCE_ADAPTER
    sa.Column("callback_url", sa.String, nullable=True),
    sa.Column("shared_secret", sa.String, nullable=False, default=""),
)

dead_letters = sa.Table(
    "dead_letters",
    _metadata,
    sa.Column("id", sa.Integer, primary_key=True, autoincrement=True),
    sa.Column("channel_id", sa.String, nullable=False),
    sa.Column("turn_id", sa.Integer, nullable=False),
    sa.Column("payload", sa.Text, nullable=False),
    sa.Column("reason", sa.Text, nullable=False),
    sa.Column("created_at", sa.String, nullable=False),
)


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class UserRow:
    user_id: str
    role: str
    display_name: str


@dataclass(frozen=True)
class CourseRow:
    course_id: str
    title: str
    owner_id: str
    current_version: int | None


@dataclass(frozen=True)
class DraftRow:
    course_id: str
    draft_id: str
    content_hash: str
    status: str
    jsonl: str
    error: str | None


@dataclass(frozen=True)
class ChannelRow:
    channel_id: str
    course_id: str
    kind: str
    callback_url: str | None
    shared_secret: str


@dataclass(frozen=True)
class TurnRow:
    turn_id: int
    course_id: str
    channel_id: str
    question: str
    served_answer: str
    message: str
    found: bool
    partial_flag: bool
    sentiment: str
    model_version: int
    asked_at: str


class Storage:
    """All reads and writes go through one engine-agnostic facade."""

    def __init__(self, url: str = "sqlite+pysqlite:///:memory:") -> None:
        kwargs: dict = {"future": True}
        if url.startswith("sqlite"):
            # One shared connection pool that works across request threads.
            kwargs["connect_args"] = {"check_same_thread": False}
            if ":memory:" in url:
                kwargs["poolclass"] = StaticPool
        self._engine = sa.create_engine(url, **kwargs)
        # SQLite connections are not thread-safe, so serialize access; a
        # server-grade engine handles its own concurrency.
        self._db_lock = threading.RLock() if url.startswith("sqlite") else None
        _metadata.create_all(self._engine)

    @contextmanager
    def _begin(self):
        guard = self._db_lock if self._db_lock is not None else nullcontext()
        with guard, self._engine.begin() as conn:
            yield conn

    @contextmanager
    def _connect(self):
        guard = self._db_lock if self._db_lock is not None else nullcontext()
        with guard, self._engine.connect() as conn:
            yield conn

    def close(self) -> None:
        self._engine.dispose()

    # -- users -------------------------------------------------------

    def add_user(self, user_id: str, role: str, display_name: str, token: str) -> None:
        with self._begin() as conn:
            conn.execute(
                users.insert().values(
                    user_id=user_id, role=role, display_name=display_name, token=token
                )
            )

    def get_user_by_token(self, token: str) -> UserRow | None:
        with self._connect() as conn:
            row = conn.execute(sa.select(users).where(users.c.token == token)).first()
        if row is None:
            return None
        return UserRow(row.user_id, row.role, row.display_name)

    def get_user(self, user_id: str) -> UserRow | None:
        with self._connect() as conn:
            row = conn.execute(sa.select(users).where(users.c.user_id == user_id)).first()
        if row is None:
            return None
        return UserRow(row.user_id, row.role, row.display_name)

    # -- courses -----------------------------------------------------

    def create_course(self, course_id: str, title: str, owner_id: str) -> None:
        with self._begin() as conn:
            conn.execute(
                courses.insert().values(
                    course_id=course_id, title=title, owner_id=owner_id, current_version=None
                )
            )

    def get_course(self, course_id: str) -> CourseRow | None:
        with self._connect() as conn:
            row = conn.execute(
                sa.select(courses).where(courses.c.course_id == course_id)
            ).first()
        if row is None:
            return None
        return CourseRow(row.course_id, row.title, row.owner_id, row.current_version)

    def list_courses(self) -> list[CourseRow]:
        with self._connect() as conn:
            rows = conn.execute(sa.select(courses).order_by(courses.c.course_id)).all()
        return [CourseRow(r.course_id, r.title, r.owner_id, r.current_version) for r in rows]

    def set_published_version(self, course_id: str, version: int) -> None:
        with self._begin() as conn:
            conn.execute(
                courses.update()
                .where(courses.c.course_id == course_id)
                .values(current_version=version)
            )

    # -- chunks ------------------------------------------------------

    def save_chunks(self, course_id: str, chunks: Sequence[DocumentChunk]) -> None:
        with self._begin() as conn:
            conn.execute(chunks_table.delete().where(chunks_table.c.course_id == course_id))
            if chunks:
                conn.execute(
                    chunks_table.insert(),
                    [
                        {
                            "course_id": course_id,
                            "chunk_id": c.chunk_id,
                            "text": c.text,
                            "span_start": c.char_span[0],
                            "span_end": c.char_span[1],
                        }
                        for c in chunks
                    ],
                )

    def load_chunks(self, course_id: str) -> list[DocumentChunk]:
        with self._connect() as conn:
            rows = conn.execute(
                sa.select(chunks_table)
                .where(chunks_table.c.course_id == course_id)
                .order_by(chunks_table.c.chunk_id)
            ).all()
        return [
            DocumentChunk(r.chunk_id, r.text, (r.span_start, r.span_end)) for r in rows
        ]

    # -- drafts ------------------------------------------------------

    def upsert_draft(
        self,
        course_id: str,
        *,
        draft_id: str,
        content_hash: str,
        status: str,
        jsonl: str = "",
        error: str | None = None,
    ) -> None:
        with self._begin() as conn:
            conn.execute(drafts.delete().where(drafts.c.course_id == course_id))
            conn.execute(
                drafts.insert().values(
                    course_id=course_id,
                    draft_id=draft_id,
                    content_hash=content_hash,
                    status=status,
                    jsonl=jsonl,
                    error=error,
                )
            )

    def update_draft(
        self, course_id: str, *, status: str, jsonl: str | None = None, error: str | None = None
    ) -> None:
        values: dict = {"status": status, "error": error}
        if jsonl is not None:
            values["jsonl"] = jsonl
        with self._begin() as conn:
            conn.execute(drafts.update().where(drafts.c.course_id == course_id).values(**values))

    def set_draft_jsonl(self, course_id: str, jsonl: str) -> None:
        with self._begin() as conn:
            conn.execute(
                drafts.update().where(drafts.c.course_id == course_id).values(jsonl=jsonl)
            )

    def get_draft(self, course_id: str) -> DraftRow | None:
        with self._connect() as conn:
            row = conn.execute(sa.select(drafts).where(drafts.c.course_id == course_id)).first()
        if row is None:
            return None
        return DraftRow(row.course_id, row.draft_id, row.content_hash, row.status, row.jsonl, row.error)

    # -- published models ---------------------------------------------

    def add_published(self, course_id: str, version: int, jsonl: str) -> None:
        with self._begin() as conn:
            conn.execute(
                published_models.insert().values(
                    course_id=course_id, version=version, jsonl=jsonl
                )
            )

    def get_published(self, course_id: str, version: int) -> str | None:
        with self._connect() as conn:
            row = conn.execute(
                sa.select(published_models.c.jsonl).where(
                    published_models.c.course_id == course_id,
                    published_models.c.version == version,
                )
            ).first()
        return None if row is None else row.jsonl

    def load_all_published(self) -> list[tuple[str, int, str]]:
        with self._connect() as conn:
            rows = conn.execute(
                sa.select(published_models).order_by(
                    published_models.c.course_id, published_models.c.version
                )
            ).all()
        return [(r.course_id, r.version, r.jsonl) for r in rows]

    # -- chat turns -----------------------------------------------------

    def log_turn(
        self,
        *,
        course_id: str,
        channel_id: str,
        question: str,
        served_answer: str,
        message: str,
        found: bool,
        partial_flag: bool,
        sentiment: str,
        model_version: int,
    ) -> int:
        with self._begin() as conn:
            result = conn.execute(
                turns.insert().values(
                    course_id=course_id,
                    channel_id=channel_id,
                    question=question,
                    served_answer=served_answer,
                    message=message,
                    found=found,
                    partial_flag=partial_flag,
                    sentiment=sentiment,
                    model_version=model_version,
                    asked_at=_now_iso(),
                )
            )
            return int(result.inserted_primary_key[0])

    def _turn_rows(self, rows) -> list[TurnRow]:
        return [
            TurnRow(
                r.turn_id,
                r.course_id,
                r.channel_id,
                r.question,
                r.served_answer,
                r.message,
                bool(r.found),
                bool(r.partial_flag),
                r.sentiment,
                r.model_version,
                r.asked_at,
            )
            for r in rows
        ]

    def turns_for_course(self, course_id: str, since: str | None = None) -> list[TurnRow]:
        query = sa.select(turns).where(turns.c.course_id == course_id)
        if since:
            query = query.where(turns.c.asked_at >= since)
        query = query.order_by(turns.c.turn_id)
        with self._connect() as conn:
            rows = conn.execute(query).all()
        return self._turn_rows(rows)

    def turns_for_channel(self, channel_id: str, after_turn: int = 0) -> list[TurnRow]:
        with self._connect() as conn:
            rows = conn.execute(
                sa.select(turns)
                .where(turns.c.channel_id == channel_id, turns.c.turn_id > after_turn)
                .order_by(turns.c.turn_id)
            ).all()
        return self._turn_rows(rows)

    def count_turns(self) -> int:
        with self._connect() as conn:
            return int(conn.execute(sa.select(sa.func.count()).select_from(turns)).scalar_one())

    # -- channels -------------------------------------------------------

    def add_channel(
        self,
        channel_id: str,
        course_id: str,
        kind: str,
        callback_url: str | None,
        shared_secret: str,
    ) -> None:
        with self._begin() as conn:
            conn.execute(
                channels.insert().values(
                    channel_id=channel_id,
                    course_id=course_id,
                    kind=kind,
                    callback_url=callback_url,
                    shared_secret=shared_secret,
                )
            )

    def get_channel(self, channel_id: str) -> ChannelRow | None:
        with self._connect() as conn:
            row = conn.execute(
                sa.select(channels).where(channels.c.channel_id == channel_id)
            ).first()
        if row is None:
            return None
        return ChannelRow(row.channel_id, row.course_id, row.kind, row.callback_url, row.shared_secret)

    # -- dead letters -----------------------------------------------------

    def add_dead_letter(self, channel_id: str, turn_id: int, payload: str, reason: str) -> None:
        with self._begin() as conn:
            conn.execute(
                dead_letters.insert().values(
                    channel_id=channel_id,
                    turn_id=turn_id,
                    payload=payload,
                    reason=reason,
                    created_at=_now_iso(),
                )
            )

    def list_dead_letters(self, channel_id: str | None = None) -> list[dict]:
        query = sa.select(dead_letters).order_by(dead_letters.c.id)
        if channel_id is not None:
            query = query.where(dead_letters.c.channel_id == channel_id)
        with self._connect() as conn:
            rows = conn.execute(query).all()
        return [
            {
                "id": r.id,
                "channel_id": r.channel_id,
                "turn_id": r.turn_id,
                "payload": r.payload,
                "reason": r.reason,
                "created_at": r.created_at,
            }
            for r in rows
        ]
