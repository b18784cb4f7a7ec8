"""Tool registry: specs plus executors, and the dispatch wrapper.

A registry is immutable; ``register`` returns a new one. Dispatch never
lets an executor exception escape: every failure, including a blown
wall-clock budget, becomes an error observation so the agent can react
and the session survives.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from dataclasses import dataclass, field
from typing import Any, Callable

from ..agent import ToolSpec
from ..errors import DuplicateKindError, UnknownKindError
from ..state import (
    CALENDAR,
    CHAT,
    CONTACT,
    EMAIL,
    OUTCOME_ERROR,
    OUTCOME_OK,
    SOURCE_TOOL,
    WEB_SEARCH,
    Action,
    Observation,
)
from .actions import (
    CalendarEventOp,
    EmailDraft,
    chat_acknowledgement,
    contacts_observation,
    exec_email,
    exec_calendar,
    web_search_observation,
)
from .connectors import Connectors, mock_connectors
from .whitelist import Whitelist

Executor = Callable[[dict[str, Any]], Any]

DEFAULT_TOOL_TIMEOUT_S = 30.0


@dataclass(frozen=True)
class RegisteredTool:
    spec: ToolSpec
    executor: Executor


@dataclass(frozen=True)
class ToolRegistry:
    tools: tuple[RegisteredTool, ...] = ()

    def register(self, spec: ToolSpec, executor: Executor) -> "ToolRegistry":
        if any(t.spec.kind == spec.kind for t in self.tools):
            raise DuplicateKindError(spec.kind)
        return ToolRegistry(self.tools + (RegisteredTool(spec, executor),))

    def get(self, kind: str) -> RegisteredTool:
        for tool in self.tools:
            if tool.spec.kind == kind:
                return tool
        raise UnknownKindError(kind)

    def specs(self) -> list[ToolSpec]:
        return [t.spec for t in self.tools]

    def kinds(self) -> list[str]:
        return [t.spec.kind for t in self.tools]


@dataclass(frozen=True)
class DispatchContext:
    timeout_s: float = DEFAULT_TOOL_TIMEOUT_S


def dispatch(action: Action, registry: ToolRegistry,
             context: DispatchContext = DispatchContext()) -> Observation:
    """Run the executor for an action and wrap whatever happens as an
    Observation. Unknown kinds raise (that is a wiring bug, not a tool
    failure the agent should reason about)."""
    tool = registry.get(action.kind)
    pool = ThreadPoolExecutor(max_workers=1)
    try:
        future = pool.submit(tool.executor, action.payload)
        try:
            result = future.result(timeout=context.timeout_s)
        except FutureTimeoutError:
            future.cancel()
            return Observation(SOURCE_TOOL, OUTCOME_ERROR,
                               f"tool timeout after {context.timeout_s:g}s")
        except Exception as exc:
            return Observation(SOURCE_TOOL, OUTCOME_ERROR, f"{type(exc).__name__}: {exc}")
    finally:
        pool.shutdown(wait=False)
    if isinstance(result, Observation):
        return result
    return Observation(SOURCE_TOOL, OUTCOME_OK, str(result))


# --- built-in tool specs --------------------------------------------------------


def builtin_specs() -> dict[str, ToolSpec]:
    return {
        CHAT: ToolSpec(
            kind=CHAT,
            description=(
                "Say something to the user: a question, a confirmation, or the final "
                "answer. This ends your turn and waits for the user's reply."
            ),
            payload_schema={
                "message": {"type": "string", "required": True,
                            "description": "what to say to the user"},
            },
            example_payload={"message": "Sure, what time should the meeting start?"},
        ),
        WEB_SEARCH: ToolSpec(
            kind=WEB_SEARCH,
            description=(
                "Search the web and Wikipedia for current information. Returns the top "
                "3 results per source."
            ),
            payload_schema={
                "query": {"type": "string", "required": True,
                          "description": "the search query"},
            },
            example_payload={"query": "weather in Pittsburgh tomorrow"},
        ),
        EMAIL: ToolSpec(
            kind=EMAIL,
            description=(
                "Send an email. Only whitelisted recipients are allowed; a single "
                "non-approved address blocks the whole send."
            ),
            payload_schema={
                "to": {"type": "array", "required": True,
                       "description": "recipient email addresses"},
                "subject": {"type": "string", "required": True, "description": "subject line"},
                "body": {"type": "string", "required": True, "description": "message body"},
            },
            example_payload={"to": ["alice@example.com"], "subject": "Notes",
                             "body": "Here are the notes from today."},
        ),
        CALENDAR: ToolSpec(
            kind=CALENDAR,
            description=(
                "Book a new calendar event or edit an existing one. Booking needs title, "
                "start and end; editing needs event_id plus the fields to change."
            ),
            payload_schema={
                "op": {"type": "string", "required": True, "description": "'book' or 'edit'"},
                "event_id": {"type": "string", "required": False,
                             "description": "id of the event to edit"},
                "title": {"type": "string", "required": False, "description": "event title"},
                "start": {"type": "string", "required": False,
                          "description": "start time, ISO-8601"},
                "end": {"type": "string", "required": False, "description": "end time, ISO-8601"},
                "attendees": {"type": "array", "required": False,
                              "description": "attendee email addresses"},
            },
            example_payload={"op": "book", "title": "Sync", "start": "2025-06-02T15:00:00",
                             "end": "2025-06-02T15:30:00", "attendees": []},
        ),
        CONTACT: ToolSpec(
            kind=CONTACT,
            description="Look up recent email contacts, optionally filtered by name or address.",
            payload_schema={
                "query": {"type": "string", "required": False,
                          "description": "substring to match against name or email"},
                "limit": {"type": "integer", "required": False,
                          "description": "max contacts to return (default 10)"},
            },
            example_payload={"query": "alice"},
        ),
    }


def default_registry(connectors: Connectors | None = None,
                     whitelist: Whitelist | Callable[[], Whitelist] | None = None,
                     enabled: tuple[str, ...] | None = None) -> ToolRegistry:
    """Registry with the five built-in tools bound to the given connectors.

    ``whitelist`` may be a value or a zero-arg callable (so a file-backed
    list is re-checked on every send).
    """
    conn = connectors or mock_connectors()
    if whitelist is None:
        whitelist = Whitelist(frozenset())
    current_whitelist = whitelist if callable(whitelist) else (lambda: whitelist)
    specs = builtin_specs()

    def run_chat(payload: dict[str, Any]) -> Observation:
        return chat_acknowledgement(str(payload.get("message", "")))

    def run_search(payload: dict[str, Any]) -> Observation:
        return web_search_observation(str(payload["query"]), conn.search_providers)

    def run_email(payload: dict[str, Any]) -> Observation:
        draft = EmailDraft(to=tuple(payload["to"]), subject=str(payload["subject"]),
                           body=str(payload["body"]))
        return exec_email(draft, current_whitelist(), conn.mail)

    def run_calendar(payload: dict[str, Any]) -> Observation:
        op = CalendarEventOp(
            op=str(payload["op"]),
            event_id=payload.get("event_id"),
            title=payload.get("title"),
            start=payload.get("start"),
            end=payload.get("end"),
            attendees=tuple(payload.get("attendees") or ()),
        )
        return exec_calendar(op, conn.calendar)

    def run_contacts(payload: dict[str, Any]) -> Observation:
        limit = payload.get("limit", 10)
        return contacts_observation(payload.get("query"), conn.contacts, limit=int(limit))

    executors: dict[str, Executor] = {
        CHAT: run_chat,
        WEB_SEARCH: run_search,
        EMAIL: run_email,
        CALENDAR: run_calendar,
        CONTACT: run_contacts,
    }
    registry = ToolRegistry()
    wanted = enabled if enabled is not None else tuple(specs)
    for kind in specs:
        if kind in wanted:
            registry = registry.register(specs[kind], executors[kind])
    return registry
