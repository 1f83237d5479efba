"""HTTP service tests: auth, lifecycle, QA contract, channels, persistence.

Everything runs against TestClient instances with injected collaborators:
an in-memory Storage, the deterministic reference gateway, and a webhook
deliverer whose HTTP client is a recording MockTransport.
"""

import json
from types import SimpleNamespace

import httpx
import pytest
from fastapi.testclient import TestClient

from conftest import FALSE_QUESTION, PARTIAL_QUESTION, reviewed_jsonl
from virtualta.gateway import GatewayUnavailable
from virtualta.gateway.reference import ReferenceGateway
from virtualta.model import NOT_FOUND_TEXT, PLACEHOLDER, parse_model_jsonl
from virtualta.service import Storage, create_app
from virtualta.service.webhooks import (
    SIGNATURE_HEADER,
    WebhookDeliverer,
    sign_payload,
    verify_signature,
)

PROF = {"Authorization": "Bearer tok-prof"}
TA = {"Authorization": "Bearer tok-ta"}
STUDENT = {"Authorization": "Bearer tok-sam"}


def hook_transport(calls):
    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(request)
        if request.url.host == "dead.example":
            return httpx.Response(500)
        return httpx.Response(200)

    return httpx.MockTransport(handler)


def build_service(storage=None, gateway=None):
    storage = storage or Storage()
    calls: list[httpx.Request] = []
    deliverer = WebhookDeliverer(
        storage,
        client=httpx.Client(transport=hook_transport(calls)),
        sleep=lambda s: None,
    )
    app = create_app(storage, gateway or ReferenceGateway(), deliverer=deliverer)
    client = TestClient(app)
    for user_id, role, token in (
        ("prof", "INSTRUCTOR", "tok-prof"),
        ("tara", "TA", "tok-ta"),
        ("sam", "STUDENT", "tok-sam"),
    ):
        client.post(
            "/users", json={"user_id": user_id, "role": role, "token": token}
        ).raise_for_status()
    return SimpleNamespace(
        client=client, app=app, storage=storage, hook_calls=calls
    )


@pytest.fixture()
def svc(bus100_text):
    service = build_service()
    service.text = bus100_text
    yield service
    service.app.state.vta.close()


def upload(svc, course_id="bus100", text=None):
    svc.client.post(
        "/courses", json={"course_id": course_id, "title": "Intro"}, headers=PROF
    )
    response = svc.client.post(
        f"/courses/{course_id}/syllabus",
        content=(text if text is not None else svc.text).encode("utf-8"),
        headers=PROF,
    )
    svc.app.state.vta.drain_drafts()
    return response


def fetch_draft(svc, course_id="bus100"):
    return parse_model_jsonl(
        svc.client.get(f"/courses/{course_id}/model/draft", headers=PROF).text
    )


def publish(svc, course_id="bus100"):
    upload(svc, course_id)
    draft = fetch_draft(svc, course_id)
    put = svc.client.put(
        f"/courses/{course_id}/model",
        content=reviewed_jsonl(draft).encode("utf-8"),
        headers=PROF,
    )
    assert put.status_code == 200, put.text
    response = svc.client.post(f"/courses/{course_id}/publish", headers=PROF)
    assert response.status_code == 200, response.text
    return response.json()["version"]


# -- health and auth -----------------------------------------------------------


def test_health_reports_gateway_surface(svc):
    body = svc.client.get("/health").json()
    assert body["status"] == "ok"
    assert "EXTRACT" in body["gateway"]
    assert "en" in body["languages"]


def test_staff_endpoints_reject_missing_token(svc):
    response = svc.client.post("/courses", json={"course_id": "x"})
    assert response.status_code == 401


def test_staff_endpoints_reject_unknown_token(svc):
    response = svc.client.post(
        "/courses", json={"course_id": "x"}, headers={"Authorization": "Bearer nope"}
    )
    assert response.status_code == 401


def test_students_cannot_use_staff_endpoints(svc):
    response = svc.client.post(
        "/courses", json={"course_id": "x"}, headers=STUDENT
    )
    assert response.status_code == 403


def test_tas_count_as_staff(svc):
    response = svc.client.post(
        "/courses", json={"course_id": "ta-made", "title": ""}, headers=TA
    )
    assert response.status_code == 201


# -- users ---------------------------------------------------------------------


def test_duplicate_user_conflicts(svc):
    payload = {"user_id": "prof", "role": "INSTRUCTOR", "token": "other"}
    assert svc.client.post("/users", json=payload).status_code == 409


def test_user_requires_known_role(svc):
    payload = {"user_id": "x", "role": "DEAN", "token": "t"}
    response = svc.client.post("/users", json=payload)
    assert response.status_code == 400
    assert "role must be one of" in response.json()["detail"]["message"]


def test_user_requires_token(svc):
    response = svc.client.post("/users", json={"user_id": "x", "role": "STUDENT"})
    assert response.status_code == 400


# -- courses ---------------------------------------------------------------------


def test_course_crud(svc):
    created = svc.client.post(
        "/courses", json={"course_id": "bus100", "title": "Intro"}, headers=PROF
    )
    assert created.status_code == 201
    assert created.json() == {
        "course_id": "bus100",
        "title": "Intro",
        "owner": "prof",
        "current_published_version": None,
    }
    assert svc.client.get("/courses/bus100").json()["owner"] == "prof"
    listing = svc.client.get("/courses").json()["courses"]
    assert [c["course_id"] for c in listing] == ["bus100"]


def test_duplicate_course_conflicts(svc):
    svc.client.post("/courses", json={"course_id": "c"}, headers=PROF)
    assert (
        svc.client.post("/courses", json={"course_id": "c"}, headers=PROF).status_code
        == 409
    )


def test_unknown_course_is_404(svc):
    assert svc.client.get("/courses/ghost").status_code == 404


# -- syllabus upload and drafts ----------------------------------------------------


def test_upload_kicks_off_draft_generation(svc):
    import hashlib

    response = upload(svc)
    assert response.status_code == 202
    body = response.json()
    assert body["draft_id"] == hashlib.sha256(svc.text.encode("utf-8")).hexdigest()

    status = svc.client.get("/courses/bus100/syllabus/status", headers=PROF).json()
    assert status == {"draft_id": body["draft_id"], "status": "READY"}


def test_reupload_of_identical_content_is_idempotent(svc):
    first = upload(svc).json()
    count_before = len(svc.storage.load_chunks("bus100"))
    second = svc.client.post(
        "/courses/bus100/syllabus", content=svc.text.encode("utf-8"), headers=PROF
    )
    assert second.status_code == 202
    assert second.json()["draft_id"] == first["draft_id"]
    assert len(svc.storage.load_chunks("bus100")) == count_before


def test_upload_replaces_draft_when_content_changes(svc):
    first = upload(svc).json()
    second = upload(svc, text=svc.text + " Late Work: Not accepted.").json()
    assert second["draft_id"] != first["draft_id"]


def test_upload_rejects_empty_and_binary_bodies(svc):
    svc.client.post("/courses", json={"course_id": "bus100"}, headers=PROF)
    empty = svc.client.post(
        "/courses/bus100/syllabus", content=b"   ", headers=PROF
    )
    assert empty.status_code == 400
    binary = svc.client.post(
        "/courses/bus100/syllabus", content=b"\xff\xfe\x00", headers=PROF
    )
    assert binary.status_code == 400
    assert "UTF-8" in binary.json()["detail"]["message"]


def test_upload_requires_staff(svc):
    svc.client.post("/courses", json={"course_id": "bus100"}, headers=PROF)
    response = svc.client.post(
        "/courses/bus100/syllabus", content=b"text", headers=STUDENT
    )
    assert response.status_code == 403


def test_draft_served_as_jsonl_with_placeholders(svc):
    upload(svc)
    response = svc.client.get("/courses/bus100/model/draft", headers=PROF)
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/x-ndjson")
    model = parse_model_jsonl(response.text)
    assert len(model) == 36
    assert all(e.verification is None for e in model.entries)
    assert PLACEHOLDER in response.text


def test_draft_before_upload_is_404(svc):
    svc.client.post("/courses", json={"course_id": "bus100"}, headers=PROF)
    response = svc.client.get("/courses/bus100/model/draft", headers=PROF)
    assert response.status_code == 404


class ExplodingGateway(ReferenceGateway):
    def rank(self, question, documents, top_k):
        raise RuntimeError("rank blew up")


def test_failed_generation_is_reported_not_stuck(bus100_text):
    service = build_service(gateway=ExplodingGateway())
    try:
        service.text = bus100_text
        upload(service)
        status = service.client.get(
            "/courses/bus100/syllabus/status", headers=PROF
        ).json()
        assert status["status"] == "FAILED"
        assert "rank blew up" in status["error"]
        draft = service.client.get("/courses/bus100/model/draft", headers=PROF)
        assert draft.status_code == 409
        assert "failed" in draft.json()["detail"]["message"]
    finally:
        service.app.state.vta.close()


# -- review (PUT /model) -----------------------------------------------------------


def test_review_round_trip_counts_verdicts(svc):
    upload(svc)
    draft = fetch_draft(svc)
    response = svc.client.put(
        "/courses/bus100/model",
        content=reviewed_jsonl(draft).encode("utf-8"),
        headers=PROF,
    )
    assert response.status_code == 200
    assert response.json() == {"entries": 36, "reviewed": 36, "unreviewed": 0}
    stored = fetch_draft(svc)
    assert stored.entry_for(FALSE_QUESTION).answer == "Three exams."


def test_partial_review_is_saved_incrementally(svc):
    upload(svc)
    draft = fetch_draft(svc)
    lines = reviewed_jsonl(draft).splitlines()
    half = "\n".join(
        line if i < 18 else json.dumps(
            {
                "QUESTION": draft.entries[i].question,
                "ANSWER": draft.entries[i].answer,
                "isTrue": PLACEHOLDER,
            },
            separators=(",", ":"),
            ensure_ascii=False,
        )
        for i, line in enumerate(lines)
    ) + "\n"
    response = svc.client.put(
        "/courses/bus100/model", content=half.encode("utf-8"), headers=PROF
    )
    assert response.status_code == 200
    assert response.json()["reviewed"] == 18
    assert response.json()["unreviewed"] == 18


def test_review_rejects_answer_edits_on_true_lines(svc):
    upload(svc)
    draft = fetch_draft(svc)
    rows = []
    for entry in draft.entries:
        verdict = "TRUE"
        answer = entry.answer
        if entry.question == "What is the course number?":
            answer = "Muahaha, edited."
        rows.append({"QUESTION": entry.question, "ANSWER": answer, "isTrue": verdict})
    body = "\n".join(json.dumps(r, separators=(",", ":")) for r in rows) + "\n"
    response = svc.client.put(
        "/courses/bus100/model", content=body.encode("utf-8"), headers=PROF
    )
    assert response.status_code == 422
    detail = response.json()["detail"]
    assert "only FALSE verdicts" in detail["message"]
    assert detail["question"] == "What is the course number?"


def test_review_rejects_answer_edits_on_unreviewed_lines(svc):
    upload(svc)
    draft = fetch_draft(svc)
    rows = [
        {
            "QUESTION": e.question,
            "ANSWER": "sneaky change" if e.question == FALSE_QUESTION else e.answer,
            "isTrue": PLACEHOLDER,
        }
        for e in draft.entries
    ]
    body = "\n".join(json.dumps(r, separators=(",", ":")) for r in rows) + "\n"
    response = svc.client.put(
        "/courses/bus100/model", content=body.encode("utf-8"), headers=PROF
    )
    assert response.status_code == 422
    assert "unreviewed line" in response.json()["detail"]["message"]


def test_review_rejects_question_set_changes(svc):
    upload(svc)
    draft = fetch_draft(svc)
    body = reviewed_jsonl(draft)
    dropped = "\n".join(body.splitlines()[1:]) + "\n"
    response = svc.client.put(
        "/courses/bus100/model", content=dropped.encode("utf-8"), headers=PROF
    )
    assert response.status_code == 422
    detail = response.json()["detail"]
    assert "question set" in detail["message"]
    assert detail["missing"] == ["What is the name of the course?"]
    assert detail["extra"] == []


def test_review_rejects_malformed_jsonl_with_line_number(svc):
    upload(svc)
    response = svc.client.put(
        "/courses/bus100/model", content=b'{"QUESTION": "broken\n', headers=PROF
    )
    assert response.status_code == 422
    assert response.json()["detail"]["line"] == 1


# -- publish -----------------------------------------------------------------------


def test_publish_before_review_is_blocked(svc):
    upload(svc)
    response = svc.client.post("/courses/bus100/publish", headers=PROF)
    assert response.status_code == 409
    detail = response.json()["detail"]
    assert "review placeholder" in detail["message"]
    assert len(detail["questions"]) == 36


def test_publish_assigns_incrementing_versions(svc):
    assert publish(svc) == 1
    draft = fetch_draft(svc)
    svc.client.put(
        "/courses/bus100/model",
        content=reviewed_jsonl(draft).encode("utf-8"),
        headers=PROF,
    )
    second = svc.client.post("/courses/bus100/publish", headers=PROF)
    assert second.json()["version"] == 2
    assert (
        svc.client.get("/courses/bus100").json()["current_published_version"] == 2
    )


def test_published_model_is_downloadable_by_version(svc):
    publish(svc)
    latest = svc.client.get("/courses/bus100/model/published", headers=PROF)
    assert latest.status_code == 200
    assert parse_model_jsonl(latest.text).entry_for(FALSE_QUESTION).answer == "Three exams."
    explicit = svc.client.get(
        "/courses/bus100/model/published", params={"version": 1}, headers=PROF
    )
    assert explicit.text == latest.text
    missing = svc.client.get(
        "/courses/bus100/model/published", params={"version": 9}, headers=PROF
    )
    assert missing.status_code == 404


def test_published_model_before_any_publish_is_409(svc):
    upload(svc)
    response = svc.client.get("/courses/bus100/model/published", headers=PROF)
    assert response.status_code == 409


# -- /ask ---------------------------------------------------------------------------


def test_ask_answers_from_the_published_model(svc):
    publish(svc)
    response = svc.client.post(
        "/courses/bus100/ask", json={"question": "What is the course number?"}
    )
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {
        "answer", "found", "partial_flag", "sentiment", "model_version", "latency_ms",
    }
    assert body["answer"] == "The course number is BUS 100."
    assert body["found"] is True
    assert body["partial_flag"] is False
    assert body["sentiment"] == "NEUTRAL"
    assert body["model_version"] == 1


def test_ask_needs_no_authentication(svc):
    publish(svc)
    response = svc.client.post(
        "/courses/bus100/ask", json={"question": "When is the final exam?"}
    )
    assert response.status_code == 200


def test_ask_serves_corrections_and_partial_flags(svc):
    publish(svc)
    corrected = svc.client.post(
        "/courses/bus100/ask", json={"question": FALSE_QUESTION}
    ).json()
    assert corrected["answer"] == "Three exams."
    partial = svc.client.post(
        "/courses/bus100/ask", json={"question": PARTIAL_QUESTION}
    ).json()
    assert partial["partial_flag"] is True


def test_ask_not_found_is_the_exact_sentinel(svc):
    publish(svc)
    response = svc.client.post(
        "/courses/bus100/ask",
        json={"question": "What is the airspeed velocity of an unladen swallow?"},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["answer"] == NOT_FOUND_TEXT
    assert body["found"] is False


def test_ask_translates_when_asked_in_spanish(svc):
    publish(svc)
    response = svc.client.post(
        "/courses/bus100/ask",
        json={"question": "¿Cuál es el número del curso?", "lang": "es"},
    )
    assert response.json()["answer"] == "El número del curso es BUS 100."


def test_ask_wraps_distressed_askers_with_support(svc):
    publish(svc)
    body = svc.client.post(
        "/courses/bus100/ask",
        json={"question": "I'm so stressed about the exam, when is it?"},
    ).json()
    assert body["sentiment"] == "NEGATIVE"
    assert body["found"] is True
    assert body["answer"].startswith("I'm sorry things feel stressful")


def test_ask_rejects_empty_question(svc):
    publish(svc)
    response = svc.client.post("/courses/bus100/ask", json={"question": "  "})
    assert response.status_code == 400


def test_ask_before_publish_is_409(svc):
    upload(svc)
    response = svc.client.post("/courses/bus100/ask", json={"question": "Q?"})
    assert response.status_code == 409


def test_ask_unknown_course_is_404(svc):
    response = svc.client.post("/courses/ghost/ask", json={"question": "Q?"})
    assert response.status_code == 404


class RankFailsGateway(ReferenceGateway):
    def rank(self, question, documents, top_k):
        raise GatewayUnavailable("backend down")


def test_ask_degraded_and_not_found_is_503(bus100_text, bank, bus100_chunks, bus100_reviewed):
    # published model is served even though the ranking backend is down;
    # only questions that would need the extraction fallback degrade
    storage = Storage()
    storage.add_user("prof", "INSTRUCTOR", "prof", "tok-prof")
    storage.create_course("bus100", "Intro", "prof")
    storage.save_chunks("bus100", bus100_chunks)
    from virtualta.model import serialize_model_jsonl

    storage.add_published("bus100", 1, serialize_model_jsonl(bus100_reviewed))
    storage.set_published_version("bus100", 1)
    app = create_app(storage, RankFailsGateway())
    try:
        client = TestClient(app)
        healthy = client.post(
            "/courses/bus100/ask", json={"question": "What is the course number?"}
        )
        assert healthy.status_code == 200

        degraded = client.post(
            "/courses/bus100/ask",
            json={"question": "What is the airspeed velocity of an unladen swallow?"},
        )
        assert degraded.status_code == 503
        assert degraded.json()["found"] is False
    finally:
        app.state.vta.close()


# -- channels ------------------------------------------------------------------------


def register_channel(svc, course_id="bus100", **overrides):
    payload = {
        "course_id": course_id,
        "kind": "WEBHOOK",
        "callback_url": "https://ok.example/hook",
        "shared_secret": "hunter2",
        "channel_id": "chan-1",
    }
    payload.update(overrides)
    return svc.client.post("/channels", json=payload, headers=PROF)


def signed(secret, payload: dict) -> tuple[bytes, dict]:
    body = json.dumps(payload).encode("utf-8")
    return body, {SIGNATURE_HEADER: sign_payload(secret, body)}


def test_channel_registration_never_echoes_the_secret(svc):
    publish(svc)
    response = register_channel(svc)
    assert response.status_code == 201
    body = response.json()
    assert body["channel_id"] == "chan-1"
    assert "shared_secret" not in body
    assert "hunter2" not in response.text


def test_webhook_channels_require_callback_and_secret(svc):
    publish(svc)
    assert register_channel(svc, callback_url=None).status_code == 400
    assert register_channel(svc, shared_secret="").status_code == 400


def test_channel_requires_known_course_and_kind(svc):
    publish(svc)
    assert register_channel(svc, course_id="ghost").status_code == 404
    assert register_channel(svc, kind="CARRIER_PIGEON").status_code == 400


def test_channel_ids_are_generated_when_missing(svc):
    publish(svc)
    payload = {"course_id": "bus100", "kind": "WEBCHAT"}
    body = svc.client.post("/channels", json=payload, headers=PROF).json()
    assert body["channel_id"]


def test_duplicate_channel_conflicts(svc):
    publish(svc)
    register_channel(svc)
    assert register_channel(svc).status_code == 409


def test_webchat_message_answers_inline(svc):
    publish(svc)
    register_channel(svc, kind="WEBCHAT", channel_id="chat-1", shared_secret="",
                     callback_url=None)
    response = svc.client.post(
        "/channels/chat-1/message",
        json={"text": "What is the course number?"},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["answer"] == "The course number is BUS 100."
    assert body["turn_id"] > 0


def test_inbound_signature_is_enforced(svc):
    publish(svc)
    register_channel(svc)
    payload = {"text": "What is the course number?"}

    unsigned = svc.client.post("/channels/chan-1/message", json=payload)
    assert unsigned.status_code == 401

    body, headers = signed("wrong-secret", payload)
    forged = svc.client.post("/channels/chan-1/message", content=body, headers=headers)
    assert forged.status_code == 401

    body, headers = signed("hunter2", payload)
    good = svc.client.post("/channels/chan-1/message", content=body, headers=headers)
    assert good.status_code == 202


def test_webhook_message_is_accepted_and_delivered(svc):
    publish(svc)
    register_channel(svc)
    body, headers = signed("hunter2", {"text": "What is the course number?"})
    response = svc.client.post("/channels/chan-1/message", content=body, headers=headers)
    assert response.status_code == 202
    turn_id = response.json()["turn_id"]
    assert response.json()["status"] == "accepted"

    svc.app.state.vta.deliverer.flush()
    assert len(svc.hook_calls) == 1
    request = svc.hook_calls[0]
    assert str(request.url) == "https://ok.example/hook"
    assert verify_signature("hunter2", request.content, request.headers[SIGNATURE_HEADER])
    assert request.headers["X-VTA-Idempotency-Key"] == str(turn_id)
    delivered = json.loads(request.content)
    assert delivered["answer"] == "The course number is BUS 100."
    assert delivered["channel_id"] == "chan-1"
    assert delivered["turn_id"] == turn_id
    assert "latency_ms" not in delivered


def test_failed_deliveries_are_dead_lettered(svc):
    publish(svc)
    register_channel(svc, callback_url="https://dead.example/hook", channel_id="chan-dead")
    body, headers = signed("hunter2", {"text": "What is the course number?"})
    response = svc.client.post("/channels/chan-dead/message", content=body, headers=headers)
    assert response.status_code == 202
    svc.app.state.vta.deliverer.flush()

    letters = svc.client.get(
        "/channels/chan-dead/dead-letters", headers=PROF
    ).json()["dead_letters"]
    assert len(letters) == 1
    assert letters[0]["reason"] == "callback returned 500"
    assert json.loads(letters[0]["payload"])["turn_id"] == response.json()["turn_id"]
    # three attempts were made before giving up
    assert len(svc.hook_calls) == 3


def test_dead_letters_require_staff(svc):
    publish(svc)
    register_channel(svc)
    response = svc.client.get("/channels/chan-1/dead-letters", headers=STUDENT)
    assert response.status_code == 403


def test_replies_are_scoped_to_the_channel_and_cursor(svc):
    publish(svc)
    register_channel(svc, kind="WEBCHAT", channel_id="chat-1", shared_secret="",
                     callback_url=None)
    first = svc.client.post(
        "/channels/chat-1/message", json={"text": "What is the course number?"}
    ).json()
    svc.client.post(
        "/channels/chat-1/message", json={"text": "When is the final exam?"}
    )
    svc.client.post("/courses/bus100/ask", json={"question": "What is the course number?"})

    replies = svc.client.get("/channels/chat-1/replies").json()["replies"]
    assert [r["question"] for r in replies] == [
        "What is the course number?",
        "When is the final exam?",
    ]
    later = svc.client.get(
        "/channels/chat-1/replies", params={"after": first["turn_id"]}
    ).json()["replies"]
    assert [r["question"] for r in later] == ["When is the final exam?"]


def test_messages_to_unregistered_channels_are_410(svc):
    response = svc.client.post("/channels/ghost/message", json={"text": "Q?"})
    assert response.status_code == 410
    assert svc.client.get("/channels/ghost/replies").status_code == 410


def test_channel_message_validates_payload(svc):
    publish(svc)
    register_channel(svc, kind="WEBCHAT", channel_id="chat-1", shared_secret="",
                     callback_url=None)
    assert (
        svc.client.post("/channels/chat-1/message", json={"text": "  "}).status_code
        == 400
    )
    bad = svc.client.post(
        "/channels/chat-1/message", content=b"[1, 2, 3]",
        headers={"Content-Type": "application/json"},
    )
    assert bad.status_code == 400


# -- log export -----------------------------------------------------------------------


def test_log_export_is_finetune_jsonl(svc):
    publish(svc)
    svc.client.post("/courses/bus100/ask", json={"question": "What is the course number?"})
    svc.client.post(
        "/courses/bus100/ask",
        json={"question": "What is the airspeed velocity of an unladen swallow?"},
    )
    response = svc.client.get("/courses/bus100/logs/export", headers=PROF)
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("application/x-ndjson")
    lines = [json.loads(l) for l in response.text.splitlines()]
    assert lines[0] == {
        "question": "What is the course number?",
        "served_answer": "The course number is BUS 100.",
        "found": True,
    }
    assert lines[1]["found"] is False
    assert lines[1]["served_answer"] == NOT_FOUND_TEXT


def test_log_export_requires_staff(svc):
    publish(svc)
    assert (
        svc.client.get("/courses/bus100/logs/export", headers=STUDENT).status_code
        == 403
    )


# -- restart persistence ----------------------------------------------------------------


def test_restart_resumes_serving_published_models(tmp_path, bus100_text):
    url = f"sqlite+pysqlite:///{tmp_path / 'vta.db'}"

    service = build_service(storage=Storage(url))
    service.text = bus100_text
    version = publish(service)
    assert version == 1
    service.app.state.vta.close()

    reborn = create_app(Storage(url), ReferenceGateway())
    try:
        client = TestClient(reborn)
        course = client.get("/courses/bus100").json()
        assert course["current_published_version"] == 1
        answer = client.post(
            "/courses/bus100/ask", json={"question": "What is the course number?"}
        )
        assert answer.status_code == 200
        assert answer.json()["answer"] == "The course number is BUS 100."
        assert answer.json()["model_version"] == 1
    finally:
        reborn.state.vta.close()


def test_restart_preserves_version_history(tmp_path, bus100_text):
    url = f"sqlite+pysqlite:///{tmp_path / 'vta.db'}"
    service = build_service(storage=Storage(url))
    service.text = bus100_text
    publish(service)
    draft = fetch_draft(service)
    service.client.put(
        "/courses/bus100/model",
        content=reviewed_jsonl(draft).encode("utf-8"),
        headers=PROF,
    )
    service.client.post("/courses/bus100/publish", headers=PROF)
    service.app.state.vta.close()

    reborn = create_app(Storage(url), ReferenceGateway())
    try:
        client = TestClient(reborn)
        # users, the reviewed draft, and both published versions all came
        # back from the database; numbering continues at 3
        publish_again = client.post("/courses/bus100/publish", headers=PROF)
        assert publish_again.status_code == 200
        assert publish_again.json()["version"] == 3
        v1 = client.get(
            "/courses/bus100/model/published", params={"version": 1}, headers=PROF
        )
        assert v1.status_code == 200
    finally:
        reborn.state.vta.close()
