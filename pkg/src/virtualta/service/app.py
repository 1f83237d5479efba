"""HTTP service: course/user management, review workflow, QA, webhooks.

Built on FastAPI.  Handlers that do real work run in the threadpool (sync
``def`` routes, or ``run_in_threadpool`` where the raw request body is
needed), so many /ask requests proceed concurrently while model mutations
stay serialized per course.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field

from fastapi import Body, Depends, FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from sqlalchemy.exc import IntegrityError
from starlette.concurrency import run_in_threadpool

from ..bank import QuestionBank, load_question_bank
from ..errors import (
    EmptySyllabusError,
    JsonlParseError,
    PublishError,
    ReviewError,
)
from ..gateway import AUTO, LanguageModelGateway
from ..gateway.reference import ReferenceGateway
from ..generate import generate_draft_model
from ..ingest import chunk_text, normalize_text
from ..model import (
    ReviewDecision,
    Verdict,
    apply_review,
    parse_model_jsonl,
    serialize_model_jsonl,
)
from ..qa import FinetuneRecord, QAEngine, Question, ResponseTemplates, export_finetune_jsonl
from ..registry import ModelRegistry
from .storage import Storage, UserRow
from .webhooks import SIGNATURE_HEADER, WebhookDeliverer, verify_signature

JSONL_MEDIA_TYPE = "application/x-ndjson"

ROLES = ("INSTRUCTOR", "TA", "STUDENT")
STAFF_ROLES = ("INSTRUCTOR", "TA")
CHANNEL_KINDS = ("WEBHOOK", "WEBCHAT", "REFERENCE_ADAPTER")

DRAFT_PENDING = "PENDING"
DRAFT_READY = "READY"
DRAFT_FAILED = "FAILED"


@dataclass
class AppState:
    """Everything the handlers share, bundled for easy test wiring."""

    storage: Storage
    gateway: LanguageModelGateway
    bank: QuestionBank
    engine: QAEngine
    registry: ModelRegistry
    deliverer: WebhookDeliverer
    max_chars: int = 200
    executor: ThreadPoolExecutor = field(
        default_factory=lambda: ThreadPoolExecutor(max_workers=2, thread_name_prefix="vta-draft")
    )
    _locks: dict[str, threading.Lock] = field(default_factory=dict)
    _locks_guard: threading.Lock = field(default_factory=threading.Lock)
    _draft_jobs: dict[str, Future] = field(default_factory=dict)

    def course_lock(self, course_id: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(course_id)
            if lock is None:
                lock = self._locks[course_id] = threading.Lock()
            return lock

    def drain_drafts(self, timeout_s: float = 30.0) -> None:
        """Wait for background draft generation to settle (test hook)."""
        with self._locks_guard:
            jobs = list(self._draft_jobs.values())
        for job in jobs:
            try:
                job.result(timeout=timeout_s)
            except Exception:
                pass

    def close(self) -> None:
        self.drain_drafts()
        self.executor.shutdown(wait=True)
        self.deliverer.close()
        self.storage.close()


def _error(status: int, message: str, **extra) -> HTTPException:
    detail: dict = {"message": message}
    detail.update(extra)
    return HTTPException(status_code=status, detail=detail)


def create_app(
    storage: Storage | None = None,
    gateway: LanguageModelGateway | None = None,
    *,
    bank: QuestionBank | None = None,
    templates: ResponseTemplates | None = None,
    deliverer: WebhookDeliverer | None = None,
    max_chars: int = 200,
    tau_model: float | None = None,
    tau_extract: float | None = None,
    top_k: int | None = None,
    cache_capacity: int | None = None,
    cache_ttl_s: float | None = None,
) -> FastAPI:
    """Assemble the service; every collaborator is injectable for tests."""
    storage = storage or Storage()
    gateway = gateway or ReferenceGateway()
    bank = bank or load_question_bank()
    engine_kwargs: dict = {}
    if tau_model is not None:
        engine_kwargs["tau_model"] = tau_model
    if tau_extract is not None:
        engine_kwargs["tau_extract"] = tau_extract
    if top_k is not None:
        engine_kwargs["top_k"] = top_k
    if cache_capacity is not None:
        engine_kwargs["cache_capacity"] = cache_capacity
    if cache_ttl_s is not None:
        engine_kwargs["cache_ttl_s"] = cache_ttl_s
    engine = QAEngine(gateway, bank, templates=templates, **engine_kwargs)
    registry = ModelRegistry()
    state = AppState(
        storage=storage,
        gateway=gateway,
        bank=bank,
        engine=engine,
        registry=registry,
        deliverer=deliverer or WebhookDeliverer(storage),
        max_chars=max_chars,
    )

    # Rebuild the in-memory registry from persisted publishes so a restart
    # resumes serving immediately.
    for course_id, version, jsonl in storage.load_all_published():
        record = registry.publish(course_id, parse_model_jsonl(jsonl))
        if record.version != version:
            raise RuntimeError(
                f"stored versions for course {course_id!r} are not contiguous"
            )

    app = FastAPI(title="VirtualTA service", version="1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.vta = state

    # -- auth ---------------------------------------------------------

    def current_user(request: Request) -> UserRow:
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise _error(401, "missing bearer token")
        user = storage.get_user_by_token(header[len("Bearer ") :].strip())
        if user is None:
            raise _error(401, "unknown token")
        return user

    def staff_user(user: UserRow = Depends(current_user)) -> UserRow:
        if user.role not in STAFF_ROLES:
            raise _error(403, "instructor or TA role required")
        return user

    def existing_course(course_id: str):
        course = storage.get_course(course_id)
        if course is None:
            raise _error(404, f"unknown course {course_id!r}")
        return course

    # -- health -------------------------------------------------------

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "gateway": sorted(c.value for c in gateway.capabilities()),
            "languages": sorted(gateway.supported_languages()),
        }

    # -- users ----------------------------------------------------------

    @app.post("/users", status_code=201)
    def create_user(payload: dict = Body(...)) -> dict:
        user_id = str(payload.get("user_id") or "").strip()
        role = str(payload.get("role") or "").strip().upper()
        token = str(payload.get("token") or "")
        display_name = str(payload.get("display_name") or user_id)
        if not user_id:
            raise _error(400, "user_id is required")
        if role not in ROLES:
            raise _error(400, f"role must be one of {', '.join(ROLES)}")
        if not token:
            raise _error(400, "token is required")
        try:
            storage.add_user(user_id, role, display_name, token)
        except IntegrityError:
            raise _error(409, f"user {user_id!r} or token already exists") from None
        return {"user_id": user_id, "role": role, "display_name": display_name}

    # -- courses ----------------------------------------------------------

    @app.post("/courses", status_code=201)
    def create_course(
        payload: dict = Body(...), user: UserRow = Depends(staff_user)
    ) -> dict:
        course_id = str(payload.get("course_id") or "").strip()
        title = str(payload.get("title") or "")
        if not course_id:
            raise _error(400, "course_id is required")
        try:
            storage.create_course(course_id, title, user.user_id)
        except IntegrityError:
            raise _error(409, f"course {course_id!r} already exists") from None
        return {
            "course_id": course_id,
            "title": title,
            "owner": user.user_id,
            "current_published_version": None,
        }

    @app.get("/courses")
    def list_courses() -> dict:
        return {
            "courses": [
                {
                    "course_id": c.course_id,
                    "title": c.title,
                    "owner": c.owner_id,
                    "current_published_version": c.current_version,
                }
                for c in storage.list_courses()
            ]
        }

    @app.get("/courses/{course_id}")
    def get_course(course_id: str) -> dict:
        course = existing_course(course_id)
        return {
            "course_id": course.course_id,
            "title": course.title,
            "owner": course.owner_id,
            "current_published_version": course.current_version,
        }

    # -- syllabus upload and draft generation ------------------------------

    def _generate_draft(course_id: str) -> None:
        try:
            chunks = storage.load_chunks(course_id)
            model = generate_draft_model(chunks, bank, gateway, top_k=engine.top_k)
            storage.update_draft(
                course_id, status=DRAFT_READY, jsonl=serialize_model_jsonl(model)
            )
        except Exception as exc:  # never leave a draft stuck in PENDING
            storage.update_draft(course_id, status=DRAFT_FAILED, error=str(exc))

    def _upload_syllabus(course_id: str, raw: bytes) -> JSONResponse:
        existing_course(course_id)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise _error(400, "body must be UTF-8 text") from None
        if not text.strip():
            raise _error(400, "syllabus body must be non-empty")
        content_hash = hashlib.sha256(raw).hexdigest()

        with state.course_lock(course_id):
            draft = storage.get_draft(course_id)
            if draft is not None and draft.content_hash == content_hash:
                if draft.status in (DRAFT_PENDING, DRAFT_READY):
                    return JSONResponse(
                        status_code=202,
                        content={"draft_id": draft.draft_id, "status": draft.status},
                    )
            if draft is not None and draft.status == DRAFT_PENDING:
                raise _error(409, "draft generation already in flight")
            try:
                chunks = chunk_text(normalize_text(text), state.max_chars)
            except EmptySyllabusError as exc:
                raise _error(400, str(exc)) from None
            storage.save_chunks(course_id, chunks)
            storage.upsert_draft(
                course_id,
                draft_id=content_hash,
                content_hash=content_hash,
                status=DRAFT_PENDING,
            )
            state._draft_jobs[course_id] = state.executor.submit(
                _generate_draft, course_id
            )
        return JSONResponse(
            status_code=202, content={"draft_id": content_hash, "status": DRAFT_PENDING}
        )

    @app.post("/courses/{course_id}/syllabus", status_code=202)
    async def upload_syllabus(
        course_id: str, request: Request, user: UserRow = Depends(staff_user)
    ) -> JSONResponse:
        raw = await request.body()
        return await run_in_threadpool(_upload_syllabus, course_id, raw)

    @app.get("/courses/{course_id}/syllabus/status")
    def syllabus_status(course_id: str, user: UserRow = Depends(staff_user)) -> dict:
        existing_course(course_id)
        draft = storage.get_draft(course_id)
        if draft is None:
            raise _error(404, "no syllabus uploaded yet")
        body = {"draft_id": draft.draft_id, "status": draft.status}
        if draft.error:
            body["error"] = draft.error
        return body

    # -- review and publish -------------------------------------------------

    def _ready_draft(course_id: str):
        draft = storage.get_draft(course_id)
        if draft is None:
            raise _error(404, "no draft exists; upload a syllabus first")
        if draft.status == DRAFT_PENDING:
            raise _error(409, "draft generation still in progress")
        if draft.status == DRAFT_FAILED:
            raise _error(409, f"draft generation failed: {draft.error}")
        return draft

    @app.get("/courses/{course_id}/model/draft")
    def get_draft(course_id: str, user: UserRow = Depends(staff_user)) -> Response:
        existing_course(course_id)
        draft = _ready_draft(course_id)
        return PlainTextResponse(draft.jsonl, media_type=JSONL_MEDIA_TYPE)

    def _apply_model_edits(course_id: str, raw: bytes) -> dict:
        existing_course(course_id)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError:
            raise _error(400, "body must be UTF-8 text") from None

        with state.course_lock(course_id):
            draft = _ready_draft(course_id)
            stored = parse_model_jsonl(draft.jsonl)
            try:
                incoming = parse_model_jsonl(text)
            except JsonlParseError as exc:
                raise _error(422, str(exc), line=exc.line) from None

            stored_questions = [e.question for e in stored.entries]
            incoming_questions = [e.question for e in incoming.entries]
            if sorted(stored_questions) != sorted(incoming_questions):
                missing = sorted(set(stored_questions) - set(incoming_questions))
                extra = sorted(set(incoming_questions) - set(stored_questions))
                raise _error(
                    422,
                    "edited model must keep the draft's question set",
                    missing=missing,
                    extra=extra,
                )

            decisions: dict[str, ReviewDecision] = {}
            for entry in incoming.entries:
                before = stored.entry_for(entry.question)
                assert before is not None
                if entry.verification is None:
                    if entry.answer != before.answer:
                        raise _error(
                            422,
                            "answer changed on an unreviewed line; set isTrue to FALSE "
                            "to supply a correction",
                            question=entry.question,
                        )
                    continue
                if entry.verification is Verdict.FALSE:
                    decisions[entry.question] = ReviewDecision(
                        Verdict.FALSE, corrected_answer=entry.answer
                    )
                else:
                    if entry.answer != before.answer:
                        raise _error(
                            422,
                            "only FALSE verdicts may change the answer",
                            question=entry.question,
                        )
                    decisions[entry.question] = ReviewDecision(entry.verification)

            try:
                updated = apply_review(stored, decisions)
            except ReviewError as exc:
                raise _error(422, str(exc), questions=exc.questions) from None
            storage.set_draft_jsonl(course_id, serialize_model_jsonl(updated))
        return {
            "entries": len(updated),
            "reviewed": sum(1 for e in updated if e.is_reviewed),
            "unreviewed": len(updated.unreviewed_questions()),
        }

    @app.put("/courses/{course_id}/model")
    async def put_model(
        course_id: str, request: Request, user: UserRow = Depends(staff_user)
    ) -> dict:
        raw = await request.body()
        return await run_in_threadpool(_apply_model_edits, course_id, raw)

    @app.post("/courses/{course_id}/publish")
    def publish(course_id: str, user: UserRow = Depends(staff_user)) -> dict:
        existing_course(course_id)
        with state.course_lock(course_id):
            draft = _ready_draft(course_id)
            model = parse_model_jsonl(draft.jsonl)
            try:
                record = registry.publish(course_id, model)
            except PublishError as exc:
                raise _error(409, str(exc), questions=exc.questions) from None
            storage.add_published(course_id, record.version, draft.jsonl)
            storage.set_published_version(course_id, record.version)
        return {"course_id": course_id, "version": record.version}

    @app.get("/courses/{course_id}/model/published")
    def get_published(
        course_id: str, version: int | None = None, user: UserRow = Depends(staff_user)
    ) -> Response:
        existing_course(course_id)
        current = registry.current(course_id)
        if current is None:
            raise _error(409, "course has no published model")
        wanted = current.version if version is None else version
        jsonl = storage.get_published(course_id, wanted)
        if jsonl is None:
            raise _error(404, f"no published version {wanted}")
        return PlainTextResponse(jsonl, media_type=JSONL_MEDIA_TYPE)

    # -- question answering ---------------------------------------------------

    def _answer(
        course_id: str, question_text: str, lang: str, channel: str
    ) -> tuple[dict, int, int]:
        """Run the QA pipeline, log the turn, shape the wire response."""
        published = registry.current(course_id)
        if published is None:
            raise _error(409, "course has no published model")
        chunks = storage.load_chunks(course_id)
        answer = state.engine.answer_question(
            Question(text=question_text, course_id=course_id, lang=lang, channel=channel),
            published,
            chunks,
        )
        message = state.engine.compose(answer, published)
        turn_id = storage.log_turn(
            course_id=course_id,
            channel_id=channel if channel != "api" else "",
            question=question_text,
            served_answer=answer.text,
            message=message,
            found=answer.found,
            partial_flag=answer.partial_flag,
            sentiment=answer.sentiment.value,
            model_version=answer.model_version,
        )
        body = {
            "answer": message,
            "found": answer.found,
            "partial_flag": answer.partial_flag,
            "sentiment": answer.sentiment.value,
            "model_version": answer.model_version,
            "latency_ms": round(answer.latency_s * 1000.0, 3),
        }
        status = 503 if (answer.degraded and not answer.found) else 200
        return body, status, turn_id

    @app.post("/courses/{course_id}/ask")
    def ask(course_id: str, payload: dict = Body(...)) -> JSONResponse:
        existing_course(course_id)
        question_text = str(payload.get("question") or "").strip()
        if not question_text:
            raise _error(400, "question must be non-empty")
        lang = str(payload.get("lang") or AUTO)
        body, status, _ = _answer(course_id, question_text, lang, channel="api")
        return JSONResponse(status_code=status, content=body)

    # -- channels ----------------------------------------------------------

    @app.post("/channels", status_code=201)
    def register_channel(
        payload: dict = Body(...), user: UserRow = Depends(staff_user)
    ) -> dict:
        course_id = str(payload.get("course_id") or "").strip()
        kind = str(payload.get("kind") or "").strip().upper()
        callback_url = payload.get("callback_url")
        shared_secret = str(payload.get("shared_secret") or "")
        channel_id = str(payload.get("channel_id") or uuid.uuid4().hex)
        existing_course(course_id)
        if kind not in CHANNEL_KINDS:
            raise _error(400, f"kind must be one of {', '.join(CHANNEL_KINDS)}")
        if kind == "WEBHOOK":
            if not callback_url:
                raise _error(400, "WEBHOOK channels require callback_url")
            if not shared_secret:
                raise _error(400, "WEBHOOK channels require shared_secret")
        try:
            storage.add_channel(channel_id, course_id, kind, callback_url, shared_secret)
        except IntegrityError:
            raise _error(409, f"channel {channel_id!r} already exists") from None
        return {
            "channel_id": channel_id,
            "course_id": course_id,
            "kind": kind,
            "callback_url": callback_url,
        }

    def _channel_message(channel_id: str, raw: bytes, signature: str | None) -> JSONResponse:
        channel = storage.get_channel(channel_id)
        if channel is None:
            raise _error(410, f"channel {channel_id!r} is not registered")
        if channel.shared_secret:
            if not signature or not verify_signature(channel.shared_secret, raw, signature):
                raise _error(401, "bad or missing webhook signature")
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, ValueError):
            raise _error(400, "body must be a JSON object") from None
        if not isinstance(payload, dict):
            raise _error(400, "body must be a JSON object")
        question_text = str(payload.get("text") or "").strip()
        if not question_text:
            raise _error(400, "text must be non-empty")
        lang = str(payload.get("lang") or AUTO)

        body, status, turn_id = _answer(
            channel.course_id, question_text, lang, channel=channel_id
        )
        if channel.kind == "WEBHOOK" and status == 200:
            outbound = dict(body)
            outbound.pop("latency_ms", None)
            outbound.update({"channel_id": channel_id, "turn_id": turn_id})
            state.deliverer.deliver(channel, turn_id, outbound)
            return JSONResponse(status_code=202, content={"turn_id": turn_id, "status": "accepted"})
        body["turn_id"] = turn_id
        return JSONResponse(status_code=status, content=body)

    @app.post("/channels/{channel_id}/message")
    async def channel_message(channel_id: str, request: Request) -> JSONResponse:
        raw = await request.body()
        signature = request.headers.get(SIGNATURE_HEADER)
        return await run_in_threadpool(_channel_message, channel_id, raw, signature)

    @app.get("/channels/{channel_id}/replies")
    def channel_replies(channel_id: str, after: int = 0) -> dict:
        channel = storage.get_channel(channel_id)
        if channel is None:
            raise _error(410, f"channel {channel_id!r} is not registered")
        return {
            "replies": [
                {
                    "turn_id": t.turn_id,
                    "question": t.question,
                    "answer": t.message,
                    "found": t.found,
                    "partial_flag": t.partial_flag,
                    "sentiment": t.sentiment,
                    "model_version": t.model_version,
                }
                for t in storage.turns_for_channel(channel_id, after)
            ]
        }

    @app.get("/channels/{channel_id}/dead-letters")
    def channel_dead_letters(
        channel_id: str, user: UserRow = Depends(staff_user)
    ) -> dict:
        channel = storage.get_channel(channel_id)
        if channel is None:
            raise _error(410, f"channel {channel_id!r} is not registered")
        return {"dead_letters": storage.list_dead_letters(channel_id)}

    # -- log export -----------------------------------------------------------

    @app.get("/courses/{course_id}/logs/export")
    def export_logs(
        course_id: str, since: str | None = None, user: UserRow = Depends(staff_user)
    ) -> Response:
        existing_course(course_id)
        records = [
            FinetuneRecord(t.question, t.served_answer, t.found)
            for t in storage.turns_for_course(course_id, since)
        ]
        return PlainTextResponse(
            export_finetune_jsonl(records), media_type=JSONL_MEDIA_TYPE
        )

    return app
