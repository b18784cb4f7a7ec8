"""Reference parser for the Thought/Action/Payload response grammar.

This is the slow, explicit oracle the production parser is fuzzed against:
a line-by-line state machine with its own fence stripping and schema
checking. It deliberately shares no parsing code with voxagent.agent; only
the error types are imported, because they are the contract.

Grammar (both parsers implement exactly this):
  - a label line is optional spaces/tabs, then "thought"/"action"/"payload"
    in any case, optional spaces/tabs, then a colon;
  - the first label line for each section opens it; its content is the rest
    of that line (minus at most one space/tab after the colon) plus all
    following lines up to the next label line of any name;
  - a repeated label still terminates the current section but collects into
    nothing;
  - thought: trimmed; action: trimmed, decoration characters (backticks,
    asterisks, quotes) stripped from both ends, trailing .,;:! stripped,
    matched case-insensitively against the registered kinds;
  - payload: trimmed, an enclosing triple-backtick fence removed, parsed as
    JSON, must be an object, then checked against the kind's schema
    (required fields present, declared types respected, extras allowed);
  - a missing section is reported in the order thought, action, payload.
"""

from __future__ import annotations

import json

from voxagent.errors import (
    MissingSectionError,
    PayloadNotJsonError,
    PayloadSchemaViolationError,
    UnknownActionKindError,
)

_SECTION_ORDER = ("thought", "action", "payload")
_DECOR = "`*\"'"
_TRAIL_PUNCT = ".,;:!"


def _label_of(line: str) -> tuple[str, str] | None:
    """(section, remainder) when the line is a label line, else None."""
    i = 0
    while i < len(line) and line[i] in " \t":
        i += 1
    for name in _SECTION_ORDER:
        if line[i:i + len(name)].lower() == name:
            j = i + len(name)
            while j < len(line) and line[j] in " \t":
                j += 1
            if j < len(line) and line[j] == ":":
                j += 1
                if j < len(line) and line[j] in " \t":
                    j += 1  # at most one separator after the colon
                return name, line[j:]
    return None


def _collect_sections(text: str) -> dict[str, list[str]]:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for line in text.split("\n"):
        label = _label_of(line)
        if label is not None:
            name, remainder = label
            if name in sections:
                current = None  # repeated label: dead zone until the next label
            else:
                sections[name] = [remainder]
                current = sections[name]
        elif current is not None:
            current.append(line)
    return sections


def _strip_fence(text: str) -> str:
    text = text.strip()
    if not text.startswith("```"):
        return text
    lines = text.split("\n")[1:]
    if lines and lines[-1].strip() == "```":
        lines = lines[:-1]
    return "\n".join(lines).strip()


def _normalize_action(text: str) -> str:
    """Fixpoint removal: leading/trailing whitespace and decoration,
    trailing punctuation; character by character until stable."""
    token = text
    changed = True
    while changed:
        changed = False
        while token and (token[0].isspace() or token[0] in _DECOR):
            token = token[1:]
            changed = True
        while token and (token[-1].isspace() or token[-1] in _DECOR
                         or token[-1] in _TRAIL_PUNCT):
            token = token[:-1]
            changed = True
    return token


_TYPE_OK = {
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: type(v) is int,
    "number": lambda v: type(v) in (int, float),
    "boolean": lambda v: type(v) is bool,
    "array": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
}


def oracle_parse(text: str, tools) -> tuple[str, str, dict]:
    """(thought, kind, payload) or a typed parse error, per the grammar."""
    sections = _collect_sections(text)
    for name in _SECTION_ORDER:
        if name not in sections:
            raise MissingSectionError(name)

    thought = "\n".join(sections["thought"]).strip()

    token = _normalize_action("\n".join(sections["action"]))
    spec = None
    for candidate in tools:
        if candidate.kind.lower() == token.lower():
            spec = candidate
            break
    if spec is None:
        raise UnknownActionKindError(token)

    raw = _strip_fence("\n".join(sections["payload"]))
    if not raw:
        raise PayloadNotJsonError("empty payload section")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PayloadNotJsonError(str(exc)) from exc
    if not isinstance(payload, dict):
        raise PayloadSchemaViolationError("payload", "must be a JSON object")

    for field_name, field_spec in spec.payload_schema.items():
        if field_name not in payload:
            if field_spec.get("required"):
                raise PayloadSchemaViolationError(field_name, "required field missing")
            continue
        check = _TYPE_OK.get(field_spec.get("type", "string"))
        if check is not None and not check(payload[field_name]):
            raise PayloadSchemaViolationError(field_name, "type mismatch")

    return thought, spec.kind, payload
