"""Minimal client for a chat-completions-compatible HTTP endpoint.

Any server speaking the common chat-completions JSON shape works (vLLM,
llama.cpp, the big hosted APIs). Responses are consumed whole; streaming
is out of scope.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import requests

from .errors import LlmRejectedError, LlmTimeoutError, LlmUnreachableError

DEFAULT_TIMEOUT_MS = 60_000
RETRY_BASE_MS = 250
RETRY_FACTOR = 2
MAX_TRANSIENT_RETRIES = 2  # total attempts <= 3

API_KEY_ENV = "VOXAGENT_LLM_API_KEY"


@dataclass(frozen=True)
class LlmRequest:
    messages: tuple[dict[str, str], ...]
    temperature: float = 0.0
    max_tokens: int = 1024
    model: str = "default"

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0]["role"] not in ("system", "user"):
            raise ValueError("first message role must be system or user")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class LlmResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: int = 0


class LlmClient(Protocol):
    """Anything that can turn an LlmRequest into an LlmResponse."""

    def complete(self, request: LlmRequest) -> LlmResponse: ...


def serialize_request(request: LlmRequest) -> str:
    """Deterministic JSON body for the chat-completions wire shape."""
    body = {
        "model": request.model,
        "messages": [dict(m) for m in request.messages],
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
    }
    return json.dumps(body, ensure_ascii=False, sort_keys=True)


def complete(
    request: LlmRequest,
    endpoint: str,
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    *,
    retry_base_ms: int = RETRY_BASE_MS,
    sleep: Callable[[float], None] = time.sleep,
) -> LlmResponse:
    """POST to {endpoint}/chat/completions and return the first choice.

    Transient transport failures (connection errors, 5xx) are retried up to
    two times with exponential backoff (base 250 ms, factor 2). 4xx is never
    retried; timeouts surface as LlmTimeoutError.
    """
    url = endpoint.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(API_KEY_ENV, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = serialize_request(request)

    last_exc: Exception | None = None
    for attempt in range(1 + MAX_TRANSIENT_RETRIES):
        if attempt:
            sleep(retry_base_ms * (RETRY_FACTOR ** (attempt - 1)) / 1000.0)
        started = time.monotonic()
        try:
            resp = requests.post(url, data=body.encode("utf-8"), headers=headers,
                                 timeout=timeout_ms / 1000.0)
        except requests.Timeout as exc:
            raise LlmTimeoutError(f"no response within {timeout_ms} ms") from exc
        except requests.RequestException as exc:
            last_exc = exc
            continue
        if 400 <= resp.status_code < 500:
            raise LlmRejectedError(resp.status_code, resp.text)
        if resp.status_code >= 500:
            last_exc = LlmUnreachableError(f"server error {resp.status_code}")
            continue
        latency_ms = int((time.monotonic() - started) * 1000)
        return _parse_response(resp, latency_ms)
    raise LlmUnreachableError(f"transport exhausted after {1 + MAX_TRANSIENT_RETRIES} attempts: {last_exc}")


def _parse_response(resp: requests.Response, latency_ms: int) -> LlmResponse:
    try:
        doc = resp.json()
        text = doc["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise LlmUnreachableError(f"malformed completion response: {exc}") from exc
    usage = doc.get("usage") or {}
    return LlmResponse(
        text=text,
        prompt_tokens=int(usage.get("prompt_tokens", 0)),
        completion_tokens=int(usage.get("completion_tokens", 0)),
        latency_ms=latency_ms,
    )


@dataclass
class HttpLlmClient:
    """LlmClient bound to one endpoint/model."""

    endpoint: str
    model: str = "default"
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    retry_base_ms: int = RETRY_BASE_MS

    def complete(self, request: LlmRequest) -> LlmResponse:
        if request.model in ("", "default") and self.model:
            request = LlmRequest(
                messages=request.messages,
                temperature=request.temperature,
                max_tokens=request.max_tokens,
                model=self.model,
            )
        return complete(request, self.endpoint, self.timeout_ms,
                        retry_base_ms=self.retry_base_ms)


@dataclass
class ScriptedLlm:
    """Deterministic LlmClient for tests and offline harness runs.

    ``script`` is either a list of response texts consumed in order or a
    callable mapping the request to a text. Every request is recorded.
    """

    script: list[str] | Callable[[LlmRequest], str]
    repeat_last: bool = False
    calls: list[LlmRequest] = field(default_factory=list)

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.calls.append(request)
        if callable(self.script):
            return LlmResponse(text=self.script(request))
        i = len(self.calls) - 1
        if i >= len(self.script):
            if not self.repeat_last or not self.script:
                raise LlmUnreachableError("scripted responses exhausted")
            i = len(self.script) - 1
        return LlmResponse(text=self.script[i])

    @property
    def call_count(self) -> int:
        return len(self.calls)
