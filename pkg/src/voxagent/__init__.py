"""voxagent: a speech-native, tool-using task agent.

A controller loops a reasoning agent over typed actions (chat, web search,
email, calendar, contacts), keeps the full action-observation history,
tracks structured dialog state, and exposes evaluation harnesses. ASR, TTS
and the language model are pluggable external services.
"""

from .config import AgentPolicy, SessionConfig
from .controller import Controller, TurnResult
from .state import (
    Action,
    Observation,
    SessionState,
    Step,
    Utterance,
    append_step,
    conversation_view,
    load_session,
    new_session,
    save_session,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "AgentPolicy",
    "Controller",
    "Observation",
    "SessionConfig",
    "SessionState",
    "Step",
    "TurnResult",
    "Utterance",
    "append_step",
    "conversation_view",
    "load_session",
    "new_session",
    "save_session",
    "__version__",
]
