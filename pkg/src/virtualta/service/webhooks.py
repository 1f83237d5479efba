"""Outbound webhook delivery with HMAC signing.

Signature scheme (inbound and outbound, documented bit-exactly in
docs/api.md): hex(HMAC-SHA-256(secret as UTF-8, raw body bytes)), sent in
the X-VTA-Signature header.  Delivery is at-least-once: one attempt plus
two retries, then the payload is dead-lettered for triage.
"""

from __future__ import annotations

import hmac
import hashlib
import json
import threading
import time
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Callable

import httpx

from .storage import ChannelRow, Storage

SIGNATURE_HEADER = "X-VTA-Signature"
IDEMPOTENCY_HEADER = "X-VTA-Idempotency-Key"

MAX_ATTEMPTS = 3  # first try + 2 retries


def sign_payload(secret: str, body: bytes) -> str:
    return hmac.new(secret.encode("utf-8"), body, hashlib.sha256).hexdigest()


def verify_signature(secret: str, body: bytes, signature: str) -> bool:
    return hmac.compare_digest(sign_payload(secret, body), signature.strip().lower())


def encode_payload(payload: dict) -> bytes:
    """Canonical body bytes: compact separators, stable key order, UTF-8."""
    return json.dumps(payload, separators=(",", ":"), sort_keys=True, ensure_ascii=False).encode(
        "utf-8"
    )


class WebhookDeliverer:
    """Background delivery of answers to registered callback URLs."""

    def __init__(
        self,
        storage: Storage,
        client: httpx.Client | None = None,
        *,
        backoff_s: float = 0.05,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self._storage = storage
        self._client = client or httpx.Client(timeout=10.0)
        self._backoff_s = backoff_s
        self._sleep = sleep
        self._executor = ThreadPoolExecutor(max_workers=4, thread_name_prefix="vta-webhook")
        self._pending: set[Future] = set()
        self._lock = threading.Lock()

    def deliver(self, channel: ChannelRow, turn_id: int, payload: dict) -> None:
        future = self._executor.submit(self._attempt, channel, turn_id, payload)
        with self._lock:
            self._pending.add(future)
        future.add_done_callback(self._discard)

    def _discard(self, future: Future) -> None:
        with self._lock:
            self._pending.discard(future)

    def flush(self, timeout_s: float = 10.0) -> None:
        """Block until every queued delivery has finished (tests use this)."""
        deadline = time.monotonic() + timeout_s
        while time.monotonic() < deadline:
            with self._lock:
                pending = list(self._pending)
            if not pending:
                return
            for future in pending:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return
                try:
                    future.result(timeout=remaining)
                except Exception:
                    pass

    def close(self) -> None:
        self.flush()
        self._executor.shutdown(wait=True)

    def _attempt(self, channel: ChannelRow, turn_id: int, payload: dict) -> None:
        if not channel.callback_url:
            return
        body = encode_payload(payload)
        headers = {
            "Content-Type": "application/json",
            SIGNATURE_HEADER: sign_payload(channel.shared_secret, body),
            IDEMPOTENCY_HEADER: str(turn_id),
        }
        reason = "unknown"
        for attempt in range(MAX_ATTEMPTS):
            if attempt:
                self._sleep(self._backoff_s * (2 ** (attempt - 1)))
            try:
                response = self._client.post(
                    channel.callback_url, content=body, headers=headers
                )
            except httpx.HTTPError as exc:
                reason = f"transport error: {exc}"
                continue
            if 200 <= response.status_code < 300:
                return
            reason = f"callback returned {response.status_code}"
        self._storage.add_dead_letter(
            channel.channel_id, turn_id, body.decode("utf-8"), reason
        )
