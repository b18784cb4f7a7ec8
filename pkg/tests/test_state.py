"""Session memory: append-only history, the chat-only view, persistence."""

from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxagent.config import AgentPolicy, SessionConfig
from voxagent.errors import (
    CorruptPayloadError,
    InvalidConfigError,
    SessionClosedError,
    UnsupportedVersionError,
)
from voxagent.state import (
    CHAT,
    SOURCE_SYSTEM,
    SOURCE_TOOL,
    SOURCE_USER,
    STATUS_CLOSED,
    Action,
    Observation,
    append_step,
    complete_pending_chat,
    conversation_view,
    load_session,
    new_session,
    save_session,
    set_pending_chat,
    steps_this_turn,
)
from dataclasses import replace


def user_obs(text: str) -> Observation:
    return Observation(SOURCE_USER, "ok", text)


def tool_obs(text: str = "done") -> Observation:
    return Observation(SOURCE_TOOL, "ok", text)


def chat_action(message: str, thought: str = "") -> Action:
    return Action(CHAT, {"message": message}, thought)


class TestNewSession:
    def test_fresh_state_is_empty(self):
        state = new_session(SessionConfig())
        assert state.steps == ()
        assert state.dialog_state == {}
        assert state.status == "awaiting_user"

    def test_invalid_whitelist_entry_names_field(self):
        config = SessionConfig(whitelist=("not-an-email",))
        with pytest.raises(InvalidConfigError) as err:
            new_session(config)
        assert err.value.field == "whitelist"

    def test_bad_llm_endpoint_rejected(self):
        with pytest.raises(InvalidConfigError) as err:
            new_session(SessionConfig(llm_endpoint="not a url"))
        assert err.value.field == "llm_endpoint"

    def test_bad_policy_rejected(self):
        config = SessionConfig(policy=AgentPolicy(max_steps_per_turn=0))
        with pytest.raises(InvalidConfigError):
            new_session(config)

    def test_session_ids_unique(self):
        config = SessionConfig()
        ids = {new_session(config).session_id for _ in range(10_000)}
        assert len(ids) == 10_000


class TestAppendStep:
    def test_base_case(self):
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("hi"))
        assert len(state.steps) == 1
        assert state.steps[0].index == 0

    def test_dense_indexing(self):
        state = new_session(SessionConfig())
        for i in range(3):
            state = append_step(state, chat_action(""), user_obs(f"u{i}"))
        state = append_step(state, Action("web_search", {"query": "x"}), tool_obs())
        assert state.steps[-1].index == 3

    def test_closed_session_rejects_append(self):
        state = replace(new_session(SessionConfig()), status=STATUS_CLOSED)
        with pytest.raises(SessionClosedError):
            append_step(state, chat_action(""), user_obs("hi"))

    def test_replay_matches_naive_list_oracle(self):
        """100 random appends compared against a plain list; every prefix of
        the final history must equal the snapshot taken at that point."""
        rng = random.Random(7)
        kinds = ["chat", "web_search", "email", "calendar", "contact"]
        state = new_session(SessionConfig())
        oracle: list[tuple[str, str]] = []
        snapshots = []
        for i in range(100):
            kind = rng.choice(kinds)
            content = f"obs-{rng.randint(0, 999)}"
            state = append_step(state, Action(kind, {"n": i}), tool_obs(content))
            oracle.append((kind, content))
            snapshots.append(state.steps)
        assert [s.index for s in state.steps] == list(range(100))
        assert [(s.action.kind, s.observation.content) for s in state.steps] == oracle
        for i, snap in enumerate(snapshots):
            assert state.steps[: i + 1] == snap  # prefix immutability

    def test_default_timestamps_never_decrease(self):
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("a"), at_ms=50, observed_at_ms=60)
        state = append_step(state, Action("web_search", {"query": "q"}), tool_obs())
        assert state.steps[1].at_ms >= 60
        assert state.steps[1].observed_at_ms >= state.steps[1].at_ms


class TestConversationView:
    def test_empty_state(self):
        assert conversation_view(new_session(SessionConfig())) == []

    def test_scripted_session_filters_tool_steps(self):
        """user greeting, web_search, chat question, user answer -> 3
        utterances (user, agent, user); the search step is invisible."""
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("hello there"),
                            at_ms=0, observed_at_ms=0)
        state = append_step(state, Action("web_search", {"query": "greetings"}),
                            tool_obs("results"), at_ms=100, observed_at_ms=150)
        state = append_step(state, chat_action("What can I do for you?", "ask back"),
                            user_obs("book a room"), at_ms=200, observed_at_ms=300)
        view = conversation_view(state)
        assert [(u.speaker, u.text) for u in view] == [
            ("user", "hello there"),
            ("agent", "What can I do for you?"),
            ("user", "book a room"),
        ]
        assert [u.timestamp_ms for u in view] == [0, 200, 300]

    def test_only_tool_steps_means_empty_view(self):
        state = new_session(SessionConfig())
        for _ in range(4):
            state = append_step(state, Action("web_search", {"query": "q"}), tool_obs())
        assert conversation_view(state) == []

    def test_pending_chat_appears_as_final_agent_utterance(self):
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("hi"))
        state = set_pending_chat(state, chat_action("Hello!"), at_ms=500)
        view = conversation_view(state)
        assert view[-1].speaker == "agent"
        assert view[-1].text == "Hello!"

    def test_view_is_pure_function_of_state(self):
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("hi"))
        state = append_step(state, chat_action("yes?"), user_obs("thanks"))
        assert conversation_view(state) == conversation_view(state)


class TestPendingChat:
    def test_complete_pending_folds_into_history(self):
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("hi"))
        state = set_pending_chat(state, chat_action("How can I help?"))
        state = complete_pending_chat(state, user_obs("send an email"))
        assert state.pending_chat is None
        assert state.steps[-1].action.payload["message"] == "How can I help?"
        assert state.steps[-1].observation.content == "send an email"

    def test_only_chat_can_be_pending(self):
        state = new_session(SessionConfig())
        with pytest.raises(ValueError):
            set_pending_chat(state, Action("web_search", {"query": "q"}))

    def test_steps_this_turn_cuts_at_last_user_observation(self):
        state = new_session(SessionConfig())
        state = append_step(state, chat_action(""), user_obs("hi"))
        state = append_step(state, Action("web_search", {"query": "q"}), tool_obs())
        state = append_step(state, Action("contact", {}), tool_obs())
        assert [s.action.kind for s in steps_this_turn(state)] == ["web_search", "contact"]
        state = append_step(state, chat_action("found it"), user_obs("thanks"))
        assert steps_this_turn(state) == ()


# --- persistence -------------------------------------------------------------------

_slot_values = st.text(
    alphabet="abcdefghijklmnopqrstuvwxyz0123456789 ", min_size=1, max_size=12
).filter(lambda s: s.strip() and " ".join(s.split()) == s)

_structured = st.none() | st.integers(-100, 100) | st.text(max_size=10) | st.lists(
    st.integers(0, 9), max_size=3)


@st.composite
def observations(draw):
    outcome = draw(st.sampled_from(["ok", "error"]))
    content = draw(st.text(min_size=1 if outcome == "error" else 0, max_size=30))
    if outcome == "error" and not content.strip():
        content = "failed"
    return Observation(
        source=draw(st.sampled_from([SOURCE_USER, SOURCE_TOOL, SOURCE_SYSTEM])),
        outcome=outcome,
        content=content,
        structured=draw(_structured),
    )


@st.composite
def actions(draw):
    kind = draw(st.sampled_from(["chat", "web_search", "email", "calendar", "contact"]))
    payload = draw(st.dictionaries(
        st.text(alphabet="abcdefgh", min_size=1, max_size=6),
        st.text(max_size=15) | st.integers(-50, 50) | st.booleans(),
        max_size=4,
    ))
    return Action(kind=kind, payload=payload, thought=draw(st.text(max_size=20)))


@st.composite
def session_states(draw, max_steps=50):
    config = SessionConfig(
        whitelist=tuple(draw(st.lists(
            st.sampled_from(["a@x.com", "b@y.org", "c@z.net"]), max_size=2, unique=True))),
        dst_enabled=draw(st.booleans()),
        policy=AgentPolicy(max_steps_per_turn=draw(st.integers(1, 10))),
    )
    state = new_session(config)
    n = draw(st.integers(0, max_steps))
    t = 0
    for _ in range(n):
        t += draw(st.integers(0, 500))
        state = append_step(state, draw(actions()), draw(observations()),
                            at_ms=t, observed_at_ms=t + draw(st.integers(0, 100)))
    state = replace(state, dialog_state=draw(st.dictionaries(
        st.sampled_from(["hotel", "train", "restaurant"]),
        st.dictionaries(st.sampled_from(["area", "day", "food"]), _slot_values, max_size=3),
        max_size=2,
    )))
    if draw(st.booleans()):
        state = set_pending_chat(state, Action(CHAT, {"message": "pending?"}, "t"))
    return state


class TestPersistence:
    def test_fresh_session_round_trips(self):
        state = new_session(SessionConfig())
        assert load_session(save_session(state)) == state

    @settings(max_examples=60, deadline=None)
    @given(session_states())
    def test_random_sessions_round_trip(self, state):
        assert load_session(save_session(state)) == state

    def test_format_is_self_describing_json(self):
        doc = json.loads(save_session(new_session(SessionConfig())).decode("utf-8"))
        for key in ("format_version", "session_id", "config", "status", "steps",
                    "dialog_state"):
            assert key in doc

    def test_truncated_payload_is_corrupt(self):
        data = save_session(new_session(SessionConfig()))
        with pytest.raises(CorruptPayloadError):
            load_session(data[: len(data) // 2])

    def test_not_json_is_corrupt(self):
        with pytest.raises(CorruptPayloadError):
            load_session(b"\x00\x01garbage")

    def test_unsupported_version_rejected(self):
        doc = json.loads(save_session(new_session(SessionConfig())).decode("utf-8"))
        doc["format_version"] = 99
        with pytest.raises(UnsupportedVersionError):
            load_session(json.dumps(doc).encode("utf-8"))

    def test_missing_field_is_corrupt(self):
        doc = json.loads(save_session(new_session(SessionConfig())).decode("utf-8"))
        del doc["steps"]
        with pytest.raises(CorruptPayloadError):
            load_session(json.dumps(doc).encode("utf-8"))


class TestAppendOnlyProperty:
    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(actions(), observations()), max_size=25))
    def test_history_prefixes_are_stable(self, pairs):
        state = new_session(SessionConfig())
        seen: list[tuple] = []
        for action, observation in pairs:
            before = state.steps
            state = append_step(state, action, observation)
            assert state.steps[: len(before)] == before
            seen.append(state.steps)
        for i, snap in enumerate(seen):
            assert state.steps[: i + 1] == snap
