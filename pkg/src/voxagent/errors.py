"""Exception types shared across the package.

Every error a caller is expected to branch on gets its own class; plain
ValueError is reserved for programming mistakes (bad arguments).
"""

from __future__ import annotations


class VoxagentError(Exception):
    """Base class for all package errors."""


# --- configuration / session lifecycle ---------------------------------------

class InvalidConfigError(VoxagentError):
    """A session config failed validation; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"invalid config field '{field}': {message}")
        self.field = field


class SessionClosedError(VoxagentError):
    pass


class UnknownSessionError(VoxagentError):
    pass


class SessionBusyError(VoxagentError):
    """A turn is already running for this session."""


# --- persistence --------------------------------------------------------------

class CorruptPayloadError(VoxagentError):
    pass


class UnsupportedVersionError(VoxagentError):
    def __init__(self, version):
        super().__init__(f"unsupported session format version: {version!r}")
        self.version = version


# --- agent decision parsing ---------------------------------------------------

class ReactParseError(VoxagentError):
    """Base for all structured-response parse failures."""


class MissingSectionError(ReactParseError):
    def __init__(self, section: str):
        super().__init__(f"missing section: {section}")
        self.section = section


class UnknownActionKindError(ReactParseError):
    def __init__(self, kind: str):
        super().__init__(f"unknown action kind: {kind!r}")
        self.kind = kind


class PayloadNotJsonError(ReactParseError):
    def __init__(self, detail: str = ""):
        super().__init__(f"payload is not valid JSON{': ' + detail if detail else ''}")


class PayloadSchemaViolationError(ReactParseError):
    def __init__(self, field: str, message: str):
        super().__init__(f"payload field '{field}': {message}")
        self.field = field


class ParseExhaustedError(VoxagentError):
    """All parse retries consumed without a valid decision."""

    def __init__(self, attempts: int, last_error: ReactParseError):
        super().__init__(f"no valid decision after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error


class MissingChatToolError(VoxagentError):
    pass


# --- LLM client ---------------------------------------------------------------

class LlmError(VoxagentError):
    pass


class LlmUnreachableError(LlmError):
    pass


class LlmRejectedError(LlmError):
    """Non-retryable 4xx from the completion endpoint."""

    def __init__(self, status: int, body: str):
        super().__init__(f"llm endpoint rejected request ({status}): {body[:200]}")
        self.status = status
        self.body = body


class LlmTimeoutError(LlmError):
    pass


# --- tools --------------------------------------------------------------------

class DuplicateKindError(VoxagentError):
    def __init__(self, kind: str):
        super().__init__(f"tool kind already registered: {kind!r}")
        self.kind = kind


class UnknownKindError(VoxagentError):
    def __init__(self, kind: str):
        super().__init__(f"no tool registered for kind: {kind!r}")
        self.kind = kind


class AllProvidersFailedError(VoxagentError):
    pass


class EventNotFoundError(VoxagentError):
    def __init__(self, event_id: str):
        super().__init__(f"event not found: {event_id}")
        self.event_id = event_id


# --- speech -------------------------------------------------------------------

class SpeechError(VoxagentError):
    pass


class BackendUnreachableError(SpeechError):
    pass


class EmptyTranscriptError(SpeechError):
    pass


class TextTooLongError(SpeechError):
    pass


class WavFormatError(SpeechError):
    pass


# --- evaluation ---------------------------------------------------------------

class CorpusParseError(VoxagentError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"corpus line {line_no}: {message}")
        self.line_no = line_no
