"""Shared test machinery: decision generators, response mutators, scripted
controllers, and the acceptance-criteria summary printed after a run."""

from __future__ import annotations

import itertools
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))  # make oracle/http_stub importable

from voxagent.agent import Decision, ToolSpec, format_decision
from voxagent.config import SessionConfig
from voxagent.controller import Controller
from voxagent.llm import ScriptedLlm
from voxagent.tools import Connectors, Whitelist, builtin_specs, default_registry, mock_connectors

DATA_DIR = Path(__file__).parent / "data"

# --- random decisions over the built-in tools ---------------------------------

_WORDS = (
    "check search the user wants a meeting room draft reply send email confirm "
    "time details first then look up results before answering book next note "
    "schedule find address invite update cancel topic summary agenda"
).split()

_DOMAINS = ("example.com", "mail.test", "corp.example.org")


def random_words(rng: random.Random, lo: int = 1, hi: int = 8) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(rng.randint(lo, hi)))


def random_email(rng: random.Random) -> str:
    return f"{rng.choice(_WORDS)}{rng.randint(1, 99)}@{rng.choice(_DOMAINS)}"


def random_thought(rng: random.Random) -> str:
    if rng.random() < 0.1:
        return ""
    lines = [random_words(rng)]
    if rng.random() < 0.2:
        lines.append(random_words(rng))
    return "\n".join(lines)


def random_payload(rng: random.Random, kind: str) -> dict:
    if kind == "chat":
        payload = {"message": random_words(rng, 2, 10)}
    elif kind == "web_search":
        payload = {"query": random_words(rng, 1, 6)}
    elif kind == "email":
        payload = {
            "to": [random_email(rng) for _ in range(rng.randint(1, 3))],
            "subject": random_words(rng, 1, 5),
            "body": random_words(rng, 3, 20),
        }
    elif kind == "calendar":
        if rng.random() < 0.5:
            payload = {
                "op": "book",
                "title": random_words(rng, 1, 4),
                "start": "2025-06-02T15:00:00",
                "end": "2025-06-02T16:00:00",
                "attendees": [random_email(rng) for _ in range(rng.randint(0, 2))],
            }
        else:
            payload = {"op": "edit", "event_id": f"evt-{rng.randint(1, 50)}",
                       "title": random_words(rng, 1, 4)}
    elif kind == "contact":
        payload = {}
        if rng.random() < 0.7:
            payload["query"] = rng.choice(_WORDS)
        if rng.random() < 0.4:
            payload["limit"] = rng.randint(1, 20)
    else:
        payload = {"value": random_words(rng)}
    if rng.random() < 0.15:  # schemas allow extra fields
        payload["extra_note"] = random_words(rng, 1, 3)
    return payload


def random_decision(rng: random.Random, specs: list[ToolSpec] | None = None) -> Decision:
    specs = specs or list(builtin_specs().values())
    spec = rng.choice(specs)
    return Decision(
        thought=random_thought(rng),
        action_kind=spec.kind,
        payload=random_payload(rng, spec.kind),
    )


# --- semantics-preserving mutations of the canonical format ---------------------

_PROSE_PREFIXES = (
    "Sure, here is my decision.",
    "Okay. Let me work through this step by step.",
    "Here is the plan I will follow",
    "Right then.",
)


def _vary_case(rng: random.Random, label: str) -> str:
    style = rng.randrange(4)
    if style == 0:
        return label
    if style == 1:
        return label.upper()
    if style == 2:
        return label.lower()
    return "".join(c.upper() if i % 2 else c.lower() for i, c in enumerate(label))


def mutate_response(rng: random.Random, decision: Decision) -> str:
    """A well-formed (still parseable, same meaning) reshuffle of the
    canonical rendering: label case and spacing, section order, fences,
    pretty-printed payload, decorated action token, prose prefix."""
    label_sep = rng.choice([":", " :", ":  ", "\t:"])
    indent = rng.choice(["", " ", "  ", "\t"])

    thought_sec = f"{indent}{_vary_case(rng, 'Thought')}{label_sep} {decision.thought}"

    action_token = decision.action_kind
    deco = rng.randrange(4)
    if deco == 1:
        action_token = f"`{action_token}`"
    elif deco == 2:
        action_token = f"{action_token}."
    elif deco == 3:
        action_token = f'"{action_token}"'
    trail = " " * rng.randrange(3)
    action_sec = f"{indent}{_vary_case(rng, 'Action')}{label_sep} {action_token}{trail}"

    payload_json = json.dumps(decision.payload, ensure_ascii=False,
                              indent=2 if rng.random() < 0.3 else None)
    if rng.random() < 0.4:
        fence = rng.choice(["```", "```json"])
        payload_body = f"{fence}\n{payload_json}\n```"
    else:
        payload_body = payload_json
    if rng.random() < 0.3:
        payload_sec = f"{indent}{_vary_case(rng, 'Payload')}{label_sep}\n{payload_body}"
    else:
        payload_sec = f"{indent}{_vary_case(rng, 'Payload')}{label_sep} {payload_body}"

    sections = [thought_sec, action_sec, payload_sec]
    rng.shuffle(sections)
    if rng.random() < 0.3:
        sections.insert(0, rng.choice(_PROSE_PREFIXES))
    if rng.random() < 0.25:  # a repeated label after the triple is ignored
        sections.append(f"{_vary_case(rng, 'Thought')}: this duplicate is dead text")
    joiner = "\n\n" if rng.random() < 0.3 else "\n"
    return joiner.join(sections)


def malformed_response(rng: random.Random) -> str:
    """Inputs that must produce a typed parse error, never a crash."""
    good = format_decision(random_decision(rng))
    case = rng.randrange(9)
    if case == 0:  # drop a section
        keep = rng.sample(["Thought", "Action", "Payload"], 2)
        return "\n".join(l for l in good.splitlines() if l.split(":")[0] in keep)
    if case == 1:  # nothing useful at all
        return rng.choice(["", "   \n\n", "no sections here", "Thought - missing colon"])
    if case == 2:  # unknown kind
        return f"Thought: hmm\nAction: {rng.choice(['teleport', 'fly', 'dance', ''])}\nPayload: {{}}"
    if case == 3:  # broken JSON
        return "Thought: x\nAction: chat\nPayload: {\"message\": "
    if case == 4:  # JSON but not an object
        scalar = rng.choice(["42", "[1, 2]", "true", '"hi"'])
        return f"Thought: x\nAction: chat\nPayload: {scalar}"
    if case == 5:  # missing required field
        return "Thought: x\nAction: chat\nPayload: {\"note\": \"no message field\"}"
    if case == 6:  # wrong type for a required field
        return "Thought: x\nAction: email\nPayload: {\"to\": \"not-a-list\", \"subject\": \"s\", \"body\": \"b\"}"
    if case == 7:  # empty payload section
        return "Thought: x\nAction: chat\nPayload:"
    return "".join(chr(rng.randrange(32, 1000)) for _ in range(rng.randint(1, 120)))


# --- scripted controller --------------------------------------------------------


def fake_clock_factory():
    """Per-session deterministic clock: 0, 100, 200, ... milliseconds."""
    counter = itertools.count()
    return lambda: next(counter) * 100


def make_controller(
    llm,
    connectors: Connectors | None = None,
    whitelist: Whitelist | None = None,
) -> Controller:
    conn = connectors or mock_connectors()
    return Controller(
        llm_factory=lambda config: llm,
        registry_factory=lambda config: default_registry(
            conn, whitelist, enabled=config.enabled_tools),
        clock_factory=fake_clock_factory,
        text_mode=True,
    )


def scripted_controller(script: list[str], **kwargs) -> tuple[Controller, ScriptedLlm]:
    llm = ScriptedLlm(script)
    return make_controller(llm, **kwargs), llm


def chat_script(*messages: str) -> list[str]:
    """Scripted responses that just chat each message in order."""
    return [format_decision(Decision("", "chat", {"message": m})) for m in messages]


def text_config(**overrides) -> SessionConfig:
    return SessionConfig(**overrides)


# --- acceptance summary -----------------------------------------------------------

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance_outcomes[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _acceptance_outcomes.items():
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")
