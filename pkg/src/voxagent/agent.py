"""The decision step: prompt rendering, response parsing, and the query loop.

The model is asked to reply in a fixed three-section format (Thought /
Action / Payload). Parsing is deliberately tolerant: section labels match
case-insensitively, sections may arrive in any order, the payload may be
wrapped in Markdown code fences, and prose before the first label is
ignored. The first occurrence of each section wins.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Any, Sequence

from .config import AgentPolicy
from .errors import (
    MissingChatToolError,
    MissingSectionError,
    ParseExhaustedError,
    PayloadNotJsonError,
    PayloadSchemaViolationError,
    ReactParseError,
    UnknownActionKindError,
)
from .llm import LlmClient, LlmRequest
from .state import CHAT, WEB_SEARCH, SessionState, steps_this_turn

SECTION_NAMES = ("thought", "action", "payload")

WEB_SEARCH_POLICY_SENTENCE = (
    "Policy: perform at least one web_search action before answering this question with chat."
)

_CORRECTIVE_TEMPLATE = (
    "Your previous reply could not be used ({error}). Reply again using exactly the three "
    "sections 'Thought:', 'Action:' and 'Payload:', where Payload is a single JSON object."
)

_POLICY_REMINDER = (
    "Reminder: policy asks for at least one web_search action before a chat answer this turn. "
    "Search first if you have not; if you already know the answer, you may answer anyway."
)


@dataclass(frozen=True)
class ToolSpec:
    """Natural-language description plus payload schema for one action kind.

    ``payload_schema`` maps field name to {"type", "required", "description"},
    where type is one of: string, integer, number, boolean, array, object.
    """

    kind: str
    description: str
    payload_schema: dict[str, dict[str, Any]]
    example_payload: dict[str, Any]

    def __post_init__(self):
        for name, field_spec in self.payload_schema.items():
            if field_spec.get("required") and name not in self.example_payload:
                raise ValueError(
                    f"tool {self.kind!r}: required field {name!r} missing from example payload"
                )


@dataclass(frozen=True)
class Decision:
    """A parsed model decision."""

    thought: str
    action_kind: str
    payload: dict[str, Any]
    raw: str = ""


_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
    "array": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
}


def validate_payload(payload: dict[str, Any], spec: ToolSpec) -> None:
    """Check required fields and declared types; extra fields are allowed."""
    for name, field_spec in spec.payload_schema.items():
        if name not in payload:
            if field_spec.get("required"):
                raise PayloadSchemaViolationError(name, "required field missing")
            continue
        expected = field_spec.get("type", "string")
        check = _TYPE_CHECKS.get(expected)
        if check is not None and not check(payload[name]):
            raise PayloadSchemaViolationError(
                name, f"expected {expected}, got {type(payload[name]).__name__}"
            )


# --- prompt rendering -----------------------------------------------------------


def load_prompt_template() -> str:
    return resources.files("voxagent.data").joinpath("agent_prompt.txt").read_text("utf-8")


def prompt_template_hash() -> str:
    """SHA-256 of the template file, logged per session for reproducibility."""
    raw = resources.files("voxagent.data").joinpath("agent_prompt.txt").read_bytes()
    return hashlib.sha256(raw).hexdigest()


def render_tool_block(spec: ToolSpec) -> str:
    lines = [f"### {spec.kind}", spec.description, "Payload fields:"]
    if not spec.payload_schema:
        lines.append("- (none)")
    for name, field_spec in spec.payload_schema.items():
        req = "required" if field_spec.get("required") else "optional"
        desc = field_spec.get("description", "")
        lines.append(f"- {name} ({field_spec.get('type', 'string')}, {req}): {desc}")
    lines.append(f"Example payload: {json.dumps(spec.example_payload, ensure_ascii=False)}")
    return "\n".join(lines)


def render_history(state: SessionState) -> str:
    if not state.steps:
        return "(no steps yet; this is the start of the session)"
    blocks = []
    for step in state.steps:
        lines = [f"Step {step.index}:"]
        if step.action.thought:
            lines.append(f"  Thought: {step.action.thought}")
        lines.append(
            f"  Action: {step.action.kind} {json.dumps(step.action.payload, ensure_ascii=False)}"
        )
        lines.append(
            f"  Observation ({step.observation.source}, {step.observation.outcome}): "
            f"{step.observation.content}"
        )
        blocks.append("\n".join(lines))
    return "\n".join(blocks)


def render_agent_prompt(
    state: SessionState, tools: Sequence[ToolSpec], policy: AgentPolicy
) -> str:
    """Deterministic full prompt for the next decision.

    Same state, tools, and policy always produce byte-identical output.
    """
    if not tools or not any(t.kind == CHAT for t in tools):
        raise MissingChatToolError("tool list must include the chat tool")
    policy_text = ""
    if policy.require_web_search_before_answer and not _searched_this_turn(state):
        policy_text = WEB_SEARCH_POLICY_SENTENCE + "\n"
    template = load_prompt_template()
    prompt = template.replace("{tools}", "\n\n".join(render_tool_block(t) for t in tools))
    prompt = prompt.replace("{history}", render_history(state))
    prompt = prompt.replace(
        "{dialog_state}", json.dumps(state.dialog_state, ensure_ascii=False, sort_keys=True)
    )
    prompt = prompt.replace("{policy}", policy_text)
    return prompt


def _searched_this_turn(state: SessionState) -> bool:
    return any(s.action.kind == WEB_SEARCH for s in steps_this_turn(state))


# --- response parsing -----------------------------------------------------------

_LABEL_RE = re.compile(
    r"^[ \t]*(thought|action|payload)[ \t]*:[ \t]?(.*)$", re.IGNORECASE | re.MULTILINE
)


def _section_texts(text: str) -> dict[str, str]:
    """First occurrence of each labeled section; content runs to the next label."""
    matches = list(_LABEL_RE.finditer(text))
    sections: dict[str, str] = {}
    for i, match in enumerate(matches):
        name = match.group(1).lower()
        if name in sections:
            continue
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        sections[name] = match.group(2) + text[match.end():end]
    return sections


def strip_code_fence(text: str) -> str:
    stripped = text.strip()
    if not stripped.startswith("```"):
        return stripped
    lines = stripped.splitlines()
    lines = lines[1:]  # drop the opening fence (possibly ```json)
    if lines and lines[-1].strip() == "```":
        lines = lines[:-1]
    return "\n".join(lines).strip()


def _normalize_action_token(text: str) -> str:
    # Fixpoint: whitespace and markdown decoration off both ends, trailing
    # punctuation off the right, until nothing changes.
    token = text
    while True:
        trimmed = token.strip().strip("`*\"'").rstrip(".,;:!").strip()
        if trimmed == token:
            return token
        token = trimmed


def parse_react_response(text: str, tools: Sequence[ToolSpec]) -> Decision:
    """Parse arbitrary model text into a validated Decision.

    Raises MissingSectionError, UnknownActionKindError, PayloadNotJsonError
    or PayloadSchemaViolationError; never anything else.
    """
    sections = _section_texts(text)
    for name in SECTION_NAMES:
        if name not in sections:
            raise MissingSectionError(name)

    thought = sections["thought"].strip()

    kind_token = _normalize_action_token(sections["action"])
    by_kind = {t.kind.lower(): t for t in tools}
    spec = by_kind.get(kind_token.lower())
    if spec is None:
        raise UnknownActionKindError(kind_token)

    raw_payload = strip_code_fence(sections["payload"])
    if not raw_payload:
        raise PayloadNotJsonError("empty payload section")
    try:
        payload = json.loads(raw_payload)
    except json.JSONDecodeError as exc:
        raise PayloadNotJsonError(str(exc)) from exc
    if not isinstance(payload, dict):
        raise PayloadSchemaViolationError("payload", "must be a JSON object")
    validate_payload(payload, spec)

    return Decision(thought=thought, action_kind=spec.kind, payload=payload, raw=text)


def format_decision(decision: Decision) -> str:
    """Canonical three-line rendering; parse_react_response inverts it."""
    return (
        f"Thought: {decision.thought}\n"
        f"Action: {decision.action_kind}\n"
        f"Payload: {json.dumps(decision.payload, ensure_ascii=False)}"
    )


# --- the decide loop ------------------------------------------------------------


def decide(
    state: SessionState,
    tools: Sequence[ToolSpec],
    policy: AgentPolicy,
    llm: LlmClient,
) -> Decision:
    """Query the model for the next action, retrying on malformed replies.

    Parse failures trigger up to ``policy.max_parse_retries`` corrective
    re-queries. If the policy wants a web search first and the model answers
    with chat anyway, one reminder re-query is made; whichever valid decision
    comes back is accepted (the policy is steering, not a hard filter).
    Total LLM calls <= 1 + max_parse_retries + 1.
    """
    prompt = render_agent_prompt(state, tools, policy)
    messages: list[dict[str, str]] = [{"role": "user", "content": prompt}]
    last_error: ReactParseError | None = None

    for _ in range(1 + policy.max_parse_retries):
        response = llm.complete(LlmRequest(messages=tuple(messages), temperature=0.0))
        try:
            decision = parse_react_response(response.text, tools)
        except ReactParseError as exc:
            last_error = exc
            messages.append({"role": "assistant", "content": response.text})
            messages.append({"role": "user", "content": _CORRECTIVE_TEMPLATE.format(error=exc)})
            continue
        if (
            policy.require_web_search_before_answer
            and decision.action_kind == CHAT
            and not _searched_this_turn(state)
        ):
            messages.append({"role": "assistant", "content": response.text})
            messages.append({"role": "user", "content": _POLICY_REMINDER})
            retry = llm.complete(LlmRequest(messages=tuple(messages), temperature=0.0))
            try:
                return parse_react_response(retry.text, tools)
            except ReactParseError:
                return decision  # keep the valid first decision
        return decision

    assert last_error is not None
    raise ParseExhaustedError(1 + policy.max_parse_retries, last_error)
