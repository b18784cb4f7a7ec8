"""The response grammar: canonical parsing, tolerance, typed errors, and
agreement with the reference state-machine oracle."""

from __future__ import annotations

import random

import pytest

from conftest import malformed_response, mutate_response, random_decision
from oracle_react import oracle_parse
from voxagent.agent import (
    Decision,
    ToolSpec,
    format_decision,
    parse_react_response,
    validate_payload,
)
from voxagent.errors import (
    MissingSectionError,
    PayloadNotJsonError,
    PayloadSchemaViolationError,
    ReactParseError,
    UnknownActionKindError,
)
from voxagent.tools import builtin_specs

TOOLS = list(builtin_specs().values())


class TestCanonicalParsing:
    def test_canonical_chat(self):
        text = 'Thought: greet back\nAction: chat\nPayload: {"message": "Hello!"}'
        decision = parse_react_response(text, TOOLS)
        assert decision.thought == "greet back"
        assert decision.action_kind == "chat"
        assert decision.payload == {"message": "Hello!"}
        assert decision.raw == text

    def test_unknown_kind(self):
        text = 'Thought: zap\nAction: teleport\nPayload: {"x": 1}'
        with pytest.raises(UnknownActionKindError) as err:
            parse_react_response(text, TOOLS)
        assert err.value.kind == "teleport"

    def test_sections_in_any_order(self):
        text = 'Payload: {"query": "cats"}\nAction: web_search\nThought: search first'
        decision = parse_react_response(text, TOOLS)
        assert decision.action_kind == "web_search"
        assert decision.thought == "search first"

    def test_case_insensitive_labels(self):
        text = 'THOUGHT: a\naCtIoN: chat\npayload: {"message": "m"}'
        assert parse_react_response(text, TOOLS).payload == {"message": "m"}

    def test_fenced_payload(self):
        text = 'Thought: t\nAction: chat\nPayload:\n```json\n{"message": "hi"}\n```'
        assert parse_react_response(text, TOOLS).payload == {"message": "hi"}

    def test_prose_before_first_label_ignored(self):
        text = 'Sure thing, here you go.\nThought: t\nAction: chat\nPayload: {"message": "x"}'
        assert parse_react_response(text, TOOLS).thought == "t"

    def test_first_complete_triple_wins(self):
        text = (
            'Thought: first\nAction: chat\nPayload: {"message": "one"}\n'
            'Thought: second\nAction: email\nPayload: {}'
        )
        decision = parse_react_response(text, TOOLS)
        assert decision.thought == "first"
        assert decision.payload == {"message": "one"}

    def test_multiline_thought_preserved(self):
        text = 'Thought: line one\nline two\nAction: chat\nPayload: {"message": "m"}'
        assert parse_react_response(text, TOOLS).thought == "line one\nline two"

    def test_action_with_decoration(self):
        text = 'Thought: t\nAction: `web_search`.\nPayload: {"query": "q"}'
        assert parse_react_response(text, TOOLS).action_kind == "web_search"


class TestTypedErrors:
    @pytest.mark.parametrize("drop,expected_section", [
        ("Thought", "thought"), ("Action", "action"), ("Payload", "payload"),
    ])
    def test_missing_section_named(self, drop, expected_section):
        lines = ['Thought: t', 'Action: chat', 'Payload: {"message": "m"}']
        text = "\n".join(l for l in lines if not l.startswith(drop))
        with pytest.raises(MissingSectionError) as err:
            parse_react_response(text, TOOLS)
        assert err.value.section == expected_section

    def test_payload_not_json(self):
        with pytest.raises(PayloadNotJsonError):
            parse_react_response('Thought: t\nAction: chat\nPayload: {oops', TOOLS)

    def test_empty_payload_section(self):
        with pytest.raises(PayloadNotJsonError):
            parse_react_response("Thought: t\nAction: chat\nPayload:", TOOLS)

    def test_payload_non_object(self):
        with pytest.raises(PayloadSchemaViolationError):
            parse_react_response("Thought: t\nAction: chat\nPayload: [1]", TOOLS)

    def test_missing_required_field_named(self):
        with pytest.raises(PayloadSchemaViolationError) as err:
            parse_react_response('Thought: t\nAction: chat\nPayload: {"note": "x"}', TOOLS)
        assert err.value.field == "message"

    def test_wrong_type_named(self):
        text = 'Thought: t\nAction: email\nPayload: {"to": "a@x.com", "subject": "s", "body": "b"}'
        with pytest.raises(PayloadSchemaViolationError) as err:
            parse_react_response(text, TOOLS)
        assert err.value.field == "to"


class TestValidatePayload:
    SPEC = ToolSpec(
        kind="demo", description="d",
        payload_schema={
            "name": {"type": "string", "required": True},
            "count": {"type": "integer", "required": False},
            "ratio": {"type": "number", "required": False},
            "flag": {"type": "boolean", "required": False},
        },
        example_payload={"name": "x"},
    )

    def test_extra_fields_allowed(self):
        validate_payload({"name": "a", "unknown": 1}, self.SPEC)

    def test_bool_is_not_integer(self):
        with pytest.raises(PayloadSchemaViolationError):
            validate_payload({"name": "a", "count": True}, self.SPEC)

    def test_int_is_a_number(self):
        validate_payload({"name": "a", "ratio": 3}, self.SPEC)

    def test_required_example_enforced(self):
        with pytest.raises(ValueError):
            ToolSpec(kind="bad", description="d",
                     payload_schema={"q": {"type": "string", "required": True}},
                     example_payload={})


class TestRoundTrip:
    def test_canonical_round_trip_sample(self):
        rng = random.Random(11)
        for _ in range(200):
            decision = random_decision(rng)
            parsed = parse_react_response(format_decision(decision), TOOLS)
            assert (parsed.thought, parsed.action_kind, parsed.payload) == (
                decision.thought, decision.action_kind, decision.payload)

    def test_unicode_payload_round_trips(self):
        decision = Decision("", "chat", {"message": "héllo — ünïcode ✓"})
        parsed = parse_react_response(format_decision(decision), TOOLS)
        assert parsed.payload == decision.payload


class TestOracleAgreement:
    """Smaller fast mirror of the acceptance fuzz; full corpus runs there."""

    def test_mutated_responses_agree_with_oracle(self):
        rng = random.Random(23)
        for _ in range(80):
            decision = random_decision(rng)
            text = mutate_response(rng, decision)
            expected = oracle_parse(text, TOOLS)
            parsed = parse_react_response(text, TOOLS)
            assert (parsed.thought, parsed.action_kind, parsed.payload) == expected
            assert (parsed.thought, parsed.action_kind, parsed.payload) == (
                decision.thought, decision.action_kind, decision.payload)

    def test_malformed_inputs_raise_same_typed_error(self):
        rng = random.Random(29)
        for _ in range(60):
            text = malformed_response(rng)
            try:
                got = parse_react_response(text, TOOLS)
            except ReactParseError as exc:
                got = type(exc)
            try:
                want = oracle_parse(text, TOOLS)
            except ReactParseError as exc:
                want = type(exc)
            assert got == want
