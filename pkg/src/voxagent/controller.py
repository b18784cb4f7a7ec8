"""The orchestrator: one decide-dispatch loop per user turn, per session.

Sessions live in memory behind per-session locks (one writer at a time;
concurrent turn requests get a busy error, never interleaved state). A
turn ends when the agent issues a chat action, or when the step budget
runs out and a summarizing chat is forced. Dialog state tracking, when
enabled, runs after the loop and before speech synthesis.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable

from .agent import decide, prompt_template_hash
from .config import SessionConfig
from .dst import (
    NO_DOMAIN,
    DialogState,
    classify_domain,
    extract_dialog_state,
    load_domain_labels,
    update_dialog_state,
)
from .errors import SessionBusyError, SessionClosedError, UnknownSessionError
from .llm import HttpLlmClient, LlmClient
from .speech import AudioClip, RemoteAsr, RemoteTts, StubAsr, StubTts, synthesize, transcribe
from .state import (
    CHAT,
    OUTCOME_OK,
    SOURCE_SYSTEM,
    SOURCE_USER,
    STATUS_AGENT_RUNNING,
    STATUS_AWAITING_USER,
    STATUS_CLOSED,
    Action,
    Observation,
    SessionState,
    Step,
    append_step,
    complete_pending_chat,
    conversation_view,
    new_session,
    save_session,
    set_pending_chat,
)
from .tools import (
    DispatchContext,
    TokenStore,
    ToolRegistry,
    WatchedWhitelist,
    connectors_from_config,
    default_registry,
    dispatch,
    mock_connectors,
)

logger = logging.getLogger(__name__)

FORCED_CHAT_TEMPLATE = (
    "Sorry, I couldn't finish that within my step budget. "
    "Actions tried this turn: {kinds}."
)

AWAITING_REPLY = Observation(SOURCE_SYSTEM, OUTCOME_OK, "message delivered; awaiting user reply")

Clock = Callable[[], int]  # milliseconds since session start


@dataclass
class TurnResult:
    """What one user turn produced."""

    agent_message: str
    audio: AudioClip | None
    steps_taken: list[Step]            # this turn only; the final entry is the chat
    dialog_state: DialogState


@dataclass
class _SessionSlot:
    state: SessionState
    llm: LlmClient
    registry: ToolRegistry
    asr: Any
    tts: Any
    domain_labels: list[str]
    clock: Clock
    lock: threading.Lock = field(default_factory=threading.Lock)
    events: list[dict[str, Any]] = field(default_factory=list)
    events_lock: threading.Lock = field(default_factory=threading.Lock)

    def emit(self, kind: str, payload: dict[str, Any]) -> None:
        with self.events_lock:
            self.events.append({"seq": len(self.events) + 1, "event": kind, "payload": payload})


def _default_llm_factory(config: SessionConfig) -> LlmClient:
    return HttpLlmClient(endpoint=config.llm_endpoint, model=config.llm_model)


def _default_asr_factory(config: SessionConfig):
    if config.asr_backend == "stub":
        return StubAsr()
    if config.asr_backend == "remote":
        return RemoteAsr(endpoint=config.asr_endpoint)
    return None


def _default_tts_factory(config: SessionConfig):
    if config.tts_backend == "stub":
        return StubTts()
    if config.tts_backend == "remote":
        return RemoteTts(endpoint=config.tts_endpoint)
    return None


def _default_registry_factory(config: SessionConfig) -> ToolRegistry:
    if config.connector_config_path:
        connectors = connectors_from_config(
            config.connector_config_path, TokenStore(config.token_store_path))
    else:
        connectors = mock_connectors()
    watched = WatchedWhitelist(config.whitelist_path, extra=config.whitelist)
    return default_registry(connectors, watched.current, enabled=config.enabled_tools)


def _monotonic_clock() -> Clock:
    t0 = time.monotonic()
    return lambda: int((time.monotonic() - t0) * 1000)


class Controller:
    """Owns all sessions and runs the per-turn workflow.

    The factory arguments exist so tests and offline runs can swap in
    scripted models, mock connectors, and a deterministic clock.
    """

    def __init__(
        self,
        *,
        llm_factory: Callable[[SessionConfig], LlmClient] = _default_llm_factory,
        registry_factory: Callable[[SessionConfig], ToolRegistry] = _default_registry_factory,
        asr_factory: Callable[[SessionConfig], Any] = _default_asr_factory,
        tts_factory: Callable[[SessionConfig], Any] = _default_tts_factory,
        clock_factory: Callable[[], Clock] = _monotonic_clock,
        dispatch_context: DispatchContext = DispatchContext(),
        text_mode: bool = False,
    ):
        self._slots: dict[str, _SessionSlot] = {}
        self._slots_lock = threading.Lock()
        self._llm_factory = llm_factory
        self._registry_factory = registry_factory
        self._asr_factory = asr_factory
        self._tts_factory = tts_factory
        self._clock_factory = clock_factory
        self._dispatch_context = dispatch_context
        self._text_mode = text_mode

    # --- lifecycle -----------------------------------------------------------

    def create_session(self, config: SessionConfig, session_id: str | None = None) -> str:
        if self._text_mode:
            config = replace(config, asr_backend="off", tts_backend="off")
        state = new_session(config, session_id=session_id)
        slot = _SessionSlot(
            state=state,
            llm=self._llm_factory(config),
            registry=self._registry_factory(config),
            asr=self._asr_factory(config),
            tts=self._tts_factory(config),
            domain_labels=load_domain_labels(config.domain_labels_path),
            clock=self._clock_factory(),
        )
        with self._slots_lock:
            self._slots[state.session_id] = slot
        logger.info("session %s created (prompt template sha256=%s)",
                    state.session_id, prompt_template_hash())
        return state.session_id

    def get_state(self, session_id: str) -> SessionState:
        return self._slot(session_id).state

    def get_transcript(self, session_id: str):
        state = self._slot(session_id).state
        return conversation_view(state), state.dialog_state

    def events_since(self, session_id: str, since: int = 0) -> list[dict[str, Any]]:
        slot = self._slot(session_id)
        with slot.events_lock:
            return [e for e in slot.events if e["seq"] > since]

    def close_session(self, session_id: str) -> str:
        """Persist the session to disk and reject further turns.

        A still-pending chat is folded into the history first so the saved
        transcript is complete. Returns the path written.
        """
        slot = self._slot(session_id)
        with slot.lock:
            state = slot.state
            if state.status == STATUS_CLOSED:
                raise SessionClosedError(session_id)
            if state.pending_chat is not None:
                state = complete_pending_chat(
                    state, Observation(SOURCE_SYSTEM, OUTCOME_OK, "session closed"),
                    observed_at_ms=slot.clock())
            state = replace(state, status=STATUS_CLOSED)
            slot.state = state
            os.makedirs(state.config.store_dir, exist_ok=True)
            path = os.path.join(state.config.store_dir, f"{state.session_id}.json")
            with open(path, "wb") as fh:
                fh.write(save_session(state))
            return path

    # --- the turn loop ---------------------------------------------------------

    def handle_user_turn(
        self,
        session_id: str,
        *,
        text: str | None = None,
        clip: AudioClip | None = None,
    ) -> TurnResult:
        if (text is None) == (clip is None):
            raise ValueError("provide exactly one of text or clip")
        slot = self._slot(session_id)
        if not slot.lock.acquire(blocking=False):
            raise SessionBusyError(f"a turn is already running for session {session_id}")
        try:
            return self._run_turn(slot, text=text, clip=clip)
        finally:
            slot.lock.release()

    def _run_turn(self, slot: _SessionSlot, *, text: str | None,
                  clip: AudioClip | None) -> TurnResult:
        state = slot.state
        if state.status == STATUS_CLOSED:
            raise SessionClosedError(state.session_id)

        if clip is not None:
            if slot.asr is None:
                raise ValueError("audio input received but ASR is disabled for this session")
            user_text = transcribe(clip, slot.asr).text
        else:
            user_text = text.strip()
            if not user_text:
                raise ValueError("user text must be non-empty")

        state = replace(state, status=STATUS_AGENT_RUNNING)
        try:
            now = slot.clock()
            user_obs = Observation(SOURCE_USER, OUTCOME_OK, user_text)
            if state.pending_chat is not None:
                state = complete_pending_chat(state, user_obs, observed_at_ms=now)
            else:
                injected = Action(CHAT, {"message": ""}, "")
                state = append_step(state, injected, user_obs, at_ms=now, observed_at_ms=now)
            slot.state = state
            slot.emit("user_utterance", {"text": user_text})

            turn_start = len(state.steps)
            policy = state.config.policy
            tools = slot.registry.specs()
            final_message = ""

            for _ in range(policy.max_steps_per_turn):
                decision = decide(state, tools, policy, slot.llm)
                slot.emit("agent_thought",
                          {"thought": decision.thought, "action": decision.action_kind})
                action = Action(decision.action_kind, decision.payload, decision.thought)
                if decision.action_kind == CHAT:
                    final_message = str(decision.payload.get("message", ""))
                    state = set_pending_chat(state, action, at_ms=slot.clock())
                    break
                slot.emit("tool_call", {"kind": action.kind, "payload": action.payload})
                at_ms = slot.clock()
                observation = dispatch(action, slot.registry, self._dispatch_context)
                state = append_step(state, action, observation,
                                    at_ms=at_ms, observed_at_ms=slot.clock())
                slot.emit("tool_result", {"kind": action.kind, "outcome": observation.outcome,
                                          "content": observation.content})
            else:
                kinds = ", ".join(s.action.kind for s in state.steps[turn_start:]) or "none"
                final_message = FORCED_CHAT_TEMPLATE.format(kinds=kinds)
                forced = Action(CHAT, {"message": final_message}, "")
                state = set_pending_chat(state, forced, at_ms=slot.clock())

            if state.config.dst_enabled:
                conversation = conversation_view(state)
                domain = classify_domain(conversation, slot.domain_labels, slot.llm)
                if domain != NO_DOMAIN:
                    extracted = extract_dialog_state(conversation, domain, slot.llm)
                    state = replace(
                        state, dialog_state=update_dialog_state(state.dialog_state, extracted))
                slot.emit("dialog_state", {"state": state.dialog_state})

            audio = None
            if slot.tts is not None and final_message.strip():
                audio = synthesize(final_message, slot.tts)
            slot.emit("agent_message",
                      {"text": final_message, "has_audio": audio is not None})
        except Exception:
            # Keep whatever history was recorded; the session stays usable.
            slot.state = replace(state, status=STATUS_AWAITING_USER)
            raise

        state = replace(state, status=STATUS_AWAITING_USER)
        slot.state = state

        steps_taken = list(state.steps[turn_start:])
        assert state.pending_chat is not None
        steps_taken.append(Step(
            index=len(state.steps), action=state.pending_chat,
            observation=AWAITING_REPLY,
            at_ms=state.pending_at_ms, observed_at_ms=state.pending_at_ms,
        ))
        return TurnResult(
            agent_message=final_message,
            audio=audio,
            steps_taken=steps_taken,
            dialog_state=state.dialog_state,
        )

    # --- internals --------------------------------------------------------------

    def _slot(self, session_id: str) -> _SessionSlot:
        with self._slots_lock:
            slot = self._slots.get(session_id)
        if slot is None:
            raise UnknownSessionError(f"no such session: {session_id}")
        return slot
