"""Session memory: the action-observation history and everything derived from it.

A session's full memory is a SessionState value. States are immutable
snapshots; every operation returns a new state, so histories are
append-only by construction and snapshots can be handed across threads.

The history is a uniform list of steps, each pairing an action with the
observation that resulted from executing it. The initial user utterance
is encoded as step 0: a system-injected chat action (empty message, empty
thought) whose observation carries the user's text. A chat step stays
*pending* on the state (not yet in the step list) until the user's reply
arrives and completes it.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .config import SessionConfig
from .errors import CorruptPayloadError, SessionClosedError, UnsupportedVersionError

FORMAT_VERSION = 1

# Built-in action kinds; the registry may add more at startup.
CHAT = "chat"
CALENDAR = "calendar"
WEB_SEARCH = "web_search"
CONTACT = "contact"
EMAIL = "email"

SPEAKER_USER = "user"
SPEAKER_AGENT = "agent"

SOURCE_USER = "user"
SOURCE_TOOL = "tool"
SOURCE_SYSTEM = "system"

OUTCOME_OK = "ok"
OUTCOME_ERROR = "error"

STATUS_AWAITING_USER = "awaiting_user"
STATUS_AGENT_RUNNING = "agent_running"
STATUS_CLOSED = "closed"


@dataclass(frozen=True)
class Utterance:
    """One line of the chat-only conversation view."""

    speaker: str                # "user" | "agent"
    text: str
    timestamp_ms: int           # milliseconds since session start, non-decreasing


@dataclass(frozen=True)
class Action:
    """An executable operation the agent chose (or the system injected)."""

    kind: str
    payload: dict[str, Any]
    thought: str = ""           # empty for system-injected actions


@dataclass(frozen=True)
class Observation:
    """Environmental feedback from executing an action."""

    source: str                 # "user" | "tool" | "system"
    outcome: str = OUTCOME_OK   # "ok" | "error"
    content: str = ""
    structured: Any = None      # optional JSON value (search hits, event id, ...)

    def __post_init__(self):
        if self.outcome == OUTCOME_ERROR and not self.content.strip():
            raise ValueError("error observations need a non-empty diagnostic")


@dataclass(frozen=True)
class Step:
    """One action-observation pair in the history.

    The two timestamps record when the action ran and when its observation
    was recorded (a chat action's observation arrives with the next user
    reply, possibly much later).
    """

    index: int
    action: Action
    observation: Observation
    at_ms: int = 0
    observed_at_ms: int = 0


@dataclass(frozen=True)
class SessionState:
    """Immutable snapshot of a session's full memory."""

    session_id: str
    config: SessionConfig
    steps: tuple[Step, ...] = ()
    dialog_state: dict[str, dict[str, str]] = field(default_factory=dict)
    status: str = STATUS_AWAITING_USER
    # A chat action whose observation (the user's reply) has not arrived yet.
    pending_chat: Optional[Action] = None
    pending_at_ms: int = 0

    def last_timestamp_ms(self) -> int:
        latest = self.pending_at_ms
        if self.steps:
            latest = max(latest, self.steps[-1].at_ms, self.steps[-1].observed_at_ms)
        return latest


def new_session(config: SessionConfig, session_id: str | None = None) -> SessionState:
    """Create an empty session after validating the config.

    ``session_id`` defaults to a fresh UUID; tests that need reproducible
    persistence output may pass one explicitly.
    """
    config.validate()
    return SessionState(session_id=session_id or str(uuid.uuid4()), config=config)


def append_step(
    state: SessionState,
    action: Action,
    observation: Observation,
    *,
    at_ms: int | None = None,
    observed_at_ms: int | None = None,
) -> SessionState:
    """Return a new state with one more step; prior steps are untouched."""
    if state.status == STATUS_CLOSED:
        raise SessionClosedError(f"session {state.session_id} is closed")
    if at_ms is None:
        at_ms = state.last_timestamp_ms()
    if observed_at_ms is None:
        observed_at_ms = max(at_ms, state.last_timestamp_ms())
    step = Step(
        index=len(state.steps),
        action=action,
        observation=observation,
        at_ms=at_ms,
        observed_at_ms=observed_at_ms,
    )
    return replace(state, steps=state.steps + (step,))


def set_pending_chat(state: SessionState, action: Action, at_ms: int | None = None) -> SessionState:
    if state.status == STATUS_CLOSED:
        raise SessionClosedError(f"session {state.session_id} is closed")
    if action.kind != CHAT:
        raise ValueError("only chat actions can be pending")
    return replace(
        state,
        pending_chat=action,
        pending_at_ms=state.last_timestamp_ms() if at_ms is None else at_ms,
    )


def complete_pending_chat(
    state: SessionState, observation: Observation, observed_at_ms: int | None = None
) -> SessionState:
    """Fold the pending chat action plus its observation into the history."""
    if state.pending_chat is None:
        raise ValueError("no pending chat to complete")
    action, at_ms = state.pending_chat, state.pending_at_ms
    state = replace(state, pending_chat=None, pending_at_ms=0)
    return append_step(state, action, observation, at_ms=at_ms, observed_at_ms=observed_at_ms)


def conversation_view(state: SessionState) -> list[Utterance]:
    """The chat-only view of the history: user and agent messages in order.

    Tool steps never appear. A chat step contributes the agent's delivered
    message (skipped for the system-injected step 0, whose message is empty)
    and, when the observation is a user reply, the user's text. A pending
    chat contributes the agent message that is still awaiting a reply.
    """
    out: list[Utterance] = []
    for step in state.steps:
        if step.action.kind != CHAT:
            continue
        message = str(step.action.payload.get("message", "")).strip()
        if message:
            out.append(Utterance(SPEAKER_AGENT, message, step.at_ms))
        if step.observation.source == SOURCE_USER and step.observation.content.strip():
            out.append(Utterance(SPEAKER_USER, step.observation.content.strip(), step.observed_at_ms))
    if state.pending_chat is not None:
        message = str(state.pending_chat.payload.get("message", "")).strip()
        if message:
            out.append(Utterance(SPEAKER_AGENT, message, state.pending_at_ms))
    return out


def steps_this_turn(state: SessionState) -> tuple[Step, ...]:
    """Steps recorded since the last user utterance (the current turn)."""
    cut = 0
    for i in range(len(state.steps) - 1, -1, -1):
        if state.steps[i].observation.source == SOURCE_USER:
            cut = i + 1
            break
    return state.steps[cut:]


# --- persistence ----------------------------------------------------------------


def save_session(state: SessionState) -> bytes:
    """Serialize to a single self-describing JSON document (UTF-8)."""
    doc = {
        "format_version": FORMAT_VERSION,
        "session_id": state.session_id,
        "config": state.config.to_dict(),
        "status": state.status,
        "steps": [_step_to_dict(s) for s in state.steps],
        "dialog_state": state.dialog_state,
        "pending_chat": _action_to_dict(state.pending_chat) if state.pending_chat else None,
        "pending_at_ms": state.pending_at_ms,
    }
    return json.dumps(doc, ensure_ascii=False, indent=2).encode("utf-8")


def load_session(data: bytes) -> SessionState:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptPayloadError(f"not a JSON session document: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CorruptPayloadError("missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise UnsupportedVersionError(doc["format_version"])
    try:
        pending = doc.get("pending_chat")
        return SessionState(
            session_id=doc["session_id"],
            config=SessionConfig.from_dict(doc["config"]),
            steps=tuple(_step_from_dict(s) for s in doc["steps"]),
            dialog_state={
                str(d): {str(k): str(v) for k, v in slots.items()}
                for d, slots in doc["dialog_state"].items()
            },
            status=doc["status"],
            pending_chat=_action_from_dict(pending) if pending else None,
            pending_at_ms=int(doc.get("pending_at_ms", 0)),
        )
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise CorruptPayloadError(f"malformed session document: {exc}") from exc


def _action_to_dict(action: Action) -> dict[str, Any]:
    return {"kind": action.kind, "payload": action.payload, "thought": action.thought}


def _action_from_dict(d: dict[str, Any]) -> Action:
    return Action(kind=d["kind"], payload=dict(d["payload"]), thought=d.get("thought", ""))


def _step_to_dict(step: Step) -> dict[str, Any]:
    return {
        "index": step.index,
        "at_ms": step.at_ms,
        "observed_at_ms": step.observed_at_ms,
        "action": _action_to_dict(step.action),
        "observation": {
            "source": step.observation.source,
            "outcome": step.observation.outcome,
            "content": step.observation.content,
            "structured": step.observation.structured,
        },
    }


def _step_from_dict(d: dict[str, Any]) -> Step:
    obs = d["observation"]
    return Step(
        index=int(d["index"]),
        action=_action_from_dict(d["action"]),
        observation=Observation(
            source=obs["source"],
            outcome=obs["outcome"],
            content=obs["content"],
            structured=obs.get("structured"),
        ),
        at_ms=int(d["at_ms"]),
        observed_at_ms=int(d["observed_at_ms"]),
    )
