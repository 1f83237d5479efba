#!/usr/bin/env python3
"""Record HTTP fixtures for the web UI contract tests.

Boots the service in-process against the reference gateway and the
BUS 100 fixture syllabus, performs the exact exchanges the vitest
suites replay, and rewrites frontend/tests/fixtures/*.json:

    python3 frontend/scripts/record_fixtures.py

Request bodies are written byte-for-byte as the TypeScript client
emits them (compact JSON, insertion key order, literal non-ASCII);
response bodies exactly as the service returned them.  Re-recording
changes only the latency_ms fields, which the UI never renders.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from virtualta.gateway.reference import ReferenceGateway
from virtualta.service.app import create_app
from virtualta.service.storage import Storage

ROOT = Path(__file__).resolve().parents[2]
FIXTURE_DIR = ROOT / "frontend" / "tests" / "fixtures"
SYLLABUS = ROOT / "tests" / "fixtures" / "bus100.txt"

STAFF_TOKEN = "tok-prof"
AUTH = {"Authorization": f"Bearer {STAFF_TOKEN}"}

FALSE_QUESTION = "How many exams does this course have?"
FALSE_CORRECTION = "Three exams."
PARTIAL_QUESTION = "What are the other materials this course uses?"


def compact(payload: dict) -> str:
    """Match JSON.stringify: compact separators, literal non-ASCII."""
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)


def ask_body(question: str, lang: str = "auto") -> str:
    return compact({"question": question, "lang": lang})


class Recorder:
    def __init__(self, client: TestClient) -> None:
        self.client = client
        self.exchanges: list[dict] = []

    def record(
        self,
        name: str,
        method: str,
        path: str,
        *,
        body: str | None = None,
        content_type: str | None = None,
        authed: bool = False,
        expect: int,
    ) -> dict:
        headers = dict(AUTH) if authed else {}
        if content_type:
            headers["Content-Type"] = content_type
        response = self.client.request(
            method,
            path,
            content=None if body is None else body.encode("utf-8"),
            headers=headers,
        )
        if response.status_code != expect:
            sys.exit(
                f"{name}: expected {expect}, got {response.status_code}: "
                f"{response.text[:300]}"
            )
        self.exchanges.append(
            {
                "name": name,
                "request": {"method": method, "path": path, "body": body, "authed": authed},
                "response": {"status": response.status_code, "body": response.text},
            }
        )
        return self.exchanges[-1]


def build_client() -> TestClient:
    """Fresh service with the BUS 100 draft generated and ready."""
    app = create_app(Storage(), ReferenceGateway())
    client = TestClient(app)
    assert client.post(
        "/users",
        json={"user_id": "prof", "role": "INSTRUCTOR", "token": STAFF_TOKEN},
    ).status_code == 201
    assert client.post(
        "/courses",
        json={"course_id": "bus100", "title": "Introduction to Business"},
        headers=AUTH,
    ).status_code == 201
    assert client.post(
        "/courses/bus100/syllabus", content=SYLLABUS.read_bytes(), headers=AUTH
    ).status_code == 202
    app.state.vta.drain_drafts()
    return client


def reviewed_lines(draft_jsonl: str) -> list[str]:
    """The scripted instructor pass, serialized the way the grid does it.

    Every row goes through the verdict dropdown, so every line is
    re-serialized client-side; the bytes must match what the dashboard
    produces when the test applies the same edits.
    """
    lines = draft_jsonl.split("\n")[:-1]
    out = []
    for line in lines:
        entry = json.loads(line)
        question, answer = entry["QUESTION"], entry["ANSWER"]
        if question == FALSE_QUESTION:
            out.append(compact({"QUESTION": question, "ANSWER": FALSE_CORRECTION, "isTrue": "FALSE"}))
        elif question == PARTIAL_QUESTION:
            out.append(compact({"QUESTION": question, "ANSWER": answer, "isTrue": "PARTIAL"}))
        else:
            out.append(compact({"QUESTION": question, "ANSWER": answer, "isTrue": "TRUE"}))
    return out


def record_review() -> list[dict]:
    """The review dashboard journey, from placeholder draft to publish."""
    client = build_client()
    rec = Recorder(client)

    draft = rec.record(
        "load draft", "GET", "/courses/bus100/model/draft", authed=True, expect=200
    )
    draft_body = draft["response"]["body"]
    lines = draft_body.split("\n")[:-1]
    assert len(lines) == 36, f"expected 36 draft lines, got {len(lines)}"

    rec.record(
        "forced publish with placeholders",
        "POST",
        "/courses/bus100/publish",
        authed=True,
        expect=409,
    )

    # An answer edited under a TRUE verdict: the one 422 the grid can
    # reach once a row's editor is unlocked by mistake.
    first = json.loads(lines[0])
    tampered = "\n".join(
        [compact({"QUESTION": first["QUESTION"], "ANSWER": "A tampered answer.", "isTrue": "TRUE"})]
        + lines[1:]
    ) + "\n"
    rec.record(
        "tampered save",
        "PUT",
        "/courses/bus100/model",
        body=tampered,
        content_type="application/x-ndjson",
        authed=True,
        expect=422,
    )

    rec.record(
        "no-edit save",
        "PUT",
        "/courses/bus100/model",
        body=draft_body,
        content_type="application/x-ndjson",
        authed=True,
        expect=200,
    )

    reviewed = "\n".join(reviewed_lines(draft_body)) + "\n"
    rec.record(
        "full review save",
        "PUT",
        "/courses/bus100/model",
        body=reviewed,
        content_type="application/x-ndjson",
        authed=True,
        expect=200,
    )

    published = rec.record(
        "publish", "POST", "/courses/bus100/publish", authed=True, expect=200
    )
    assert json.loads(published["response"]["body"])["version"] == 1

    corrected = rec.record(
        "ask corrected question",
        "POST",
        "/courses/bus100/ask",
        body=ask_body(FALSE_QUESTION),
        content_type="application/json",
        expect=200,
    )
    answer = json.loads(corrected["response"]["body"])
    assert answer["answer"] == FALSE_CORRECTION and answer["found"]
    return rec.exchanges


def record_chat() -> list[dict]:
    """Chat exchanges against an already-reviewed, published course."""
    client = build_client()
    draft_body = client.get("/courses/bus100/model/draft", headers=AUTH).text
    reviewed = "\n".join(reviewed_lines(draft_body)) + "\n"
    assert client.put(
        "/courses/bus100/model", content=reviewed.encode("utf-8"), headers=AUTH
    ).status_code == 200
    assert client.post("/courses/bus100/publish", headers=AUTH).status_code == 200

    rec = Recorder(client)

    health = rec.record("health", "GET", "/health", expect=200)
    languages = set(json.loads(health["response"]["body"])["languages"])
    assert {"en", "es", "fr", "de"} <= languages, languages

    plain = rec.record(
        "ask course number",
        "POST",
        "/courses/bus100/ask",
        body=ask_body("What is the course number?"),
        content_type="application/json",
        expect=200,
    )
    payload = json.loads(plain["response"]["body"])
    assert payload["answer"] == "The course number is BUS 100."
    assert payload["found"] and payload["sentiment"] == "NEUTRAL"

    spanish = rec.record(
        "ask in spanish",
        "POST",
        "/courses/bus100/ask",
        body=ask_body("¿Cuál es el número del curso?", lang="es"),
        content_type="application/json",
        expect=200,
    )
    payload = json.loads(spanish["response"]["body"])
    assert payload["answer"] == "El número del curso es BUS 100.", payload

    partial = rec.record(
        "ask partial question",
        "POST",
        "/courses/bus100/ask",
        body=ask_body(PARTIAL_QUESTION),
        content_type="application/json",
        expect=200,
    )
    payload = json.loads(partial["response"]["body"])
    assert payload["found"] and payload["partial_flag"], payload

    stressed = rec.record(
        "ask while stressed",
        "POST",
        "/courses/bus100/ask",
        body=ask_body("I'm so stressed about the exam, when is it?"),
        content_type="application/json",
        expect=200,
    )
    payload = json.loads(stressed["response"]["body"])
    assert payload["found"] and payload["sentiment"] == "NEGATIVE", payload

    gibberish = rec.record(
        "ask gibberish",
        "POST",
        "/courses/bus100/ask",
        body=ask_body("What is the airspeed velocity of an unladen swallow?"),
        content_type="application/json",
        expect=200,
    )
    payload = json.loads(gibberish["response"]["body"])
    assert not payload["found"], payload
    return rec.exchanges


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for name, exchanges in (("review", record_review()), ("chat", record_chat())):
        path = FIXTURE_DIR / f"{name}.json"
        path.write_text(
            json.dumps(exchanges, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        print(f"wrote {path.relative_to(ROOT)} ({len(exchanges)} exchanges)")


if __name__ == "__main__":
    main()
