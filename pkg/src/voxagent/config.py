"""Session configuration: agent policy, backends, safety settings.

A SessionConfig is a plain dataclass so it can be built in code, loaded
from a JSON file, and serialized into the session persistence format.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from typing import Any
from urllib.parse import urlparse

from .errors import InvalidConfigError

BUILTIN_TOOL_KINDS = ("chat", "calendar", "web_search", "contact", "email")

# Syntactic check only: local-part@domain.tld with no whitespace.
_EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")


def is_valid_email(address: str) -> bool:
    return bool(_EMAIL_RE.match(address))


@dataclass(frozen=True)
class AgentPolicy:
    """Knobs steering the decision loop."""

    require_web_search_before_answer: bool = False
    max_steps_per_turn: int = 8
    max_parse_retries: int = 2

    def validate(self) -> None:
        if self.max_steps_per_turn < 1:
            raise InvalidConfigError("policy.max_steps_per_turn", "must be >= 1")
        if self.max_parse_retries < 0:
            raise InvalidConfigError("policy.max_parse_retries", "must be >= 0")


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session needs to run: endpoints, backends, safety."""

    llm_endpoint: str = "http://localhost:8000/v1"
    llm_model: str = "default"
    asr_backend: str = "off"        # off | stub | remote
    asr_endpoint: str = ""
    tts_backend: str = "off"        # off | stub | remote
    tts_endpoint: str = ""
    enabled_tools: tuple[str, ...] = BUILTIN_TOOL_KINDS
    whitelist: tuple[str, ...] = ()
    whitelist_path: str = ""
    policy: AgentPolicy = field(default_factory=AgentPolicy)
    dst_enabled: bool = False
    domain_labels_path: str = ""    # empty -> packaged default label set
    token_store_path: str = "tokens.json"
    connector_config_path: str = ""  # empty -> in-memory mock connectors
    store_dir: str = "sessions"

    def validate(self) -> None:
        """Raise InvalidConfigError naming the first offending field."""
        _require_url("llm_endpoint", self.llm_endpoint)
        for name, backend, endpoint in (
            ("asr", self.asr_backend, self.asr_endpoint),
            ("tts", self.tts_backend, self.tts_endpoint),
        ):
            if backend not in ("off", "stub", "remote"):
                raise InvalidConfigError(f"{name}_backend", f"unknown backend {backend!r}")
            if backend == "remote":
                _require_url(f"{name}_endpoint", endpoint)
        if "chat" not in self.enabled_tools:
            raise InvalidConfigError("enabled_tools", "the chat tool cannot be disabled")
        for entry in self.whitelist:
            if not is_valid_email(entry):
                raise InvalidConfigError("whitelist", f"not a valid email address: {entry!r}")
        self.policy.validate()

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SessionConfig":
        data = dict(data)
        policy = data.pop("policy", {})
        if isinstance(policy, dict):
            policy = AgentPolicy(**policy)
        known = {f for f in cls.__dataclass_fields__}  # ignore foreign keys
        kwargs = {k: v for k, v in data.items() if k in known}
        for tuple_field in ("enabled_tools", "whitelist"):
            if tuple_field in kwargs:
                kwargs[tuple_field] = tuple(kwargs[tuple_field])
        return cls(policy=policy, **kwargs)

    @classmethod
    def from_file(cls, path: str) -> "SessionConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _require_url(field_name: str, value: str) -> None:
    parsed = urlparse(value)
    if parsed.scheme not in ("http", "https") or not parsed.netloc:
        raise InvalidConfigError(field_name, f"not an absolute http(s) URL: {value!r}")
