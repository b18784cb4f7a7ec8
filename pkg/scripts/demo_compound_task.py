#!/usr/bin/env python3
"""Run a scripted compound task end to end, offline, and print the session.

No model, no network: the LLM is scripted, the connectors are in-memory
mocks, ASR/TTS are off. Shows the full decide/dispatch loop, the pending
chat mechanics, and the persisted session document.

Usage: python scripts/demo_compound_task.py
"""

from __future__ import annotations

import json
import tempfile

from voxagent.agent import Decision, format_decision
from voxagent.config import SessionConfig
from voxagent.controller import Controller
from voxagent.llm import ScriptedLlm
from voxagent.tools import (
    Connectors,
    Contact,
    MockCalendar,
    MockContacts,
    MockMailSender,
    SearchResult,
    StaticSearchProvider,
    Whitelist,
    default_registry,
)

BOB = "bob@corp.example.org"

SCRIPT = [
    format_decision(Decision("Look up Bob's address first.", "contact", {"query": "bob"})),
    format_decision(Decision("Find the notes link.", "web_search", {"query": "sprint notes"})),
    format_decision(Decision("Confirm before sending.", "chat", {
        "message": f"I found Bob <{BOB}> and the notes link. Send the email?"})),
    format_decision(Decision("Confirmed; send it.", "email", {
        "to": [BOB], "subject": "Sprint notes",
        "body": "Notes: https://notes.example/sprint"})),
    format_decision(Decision("Report back.", "chat", {"message": "Sent to Bob."})),
]

TURNS = ["Email Bob a link to the sprint notes.", "Yes, go ahead."]


def main() -> None:
    connectors = Connectors(
        search_providers=[
            StaticSearchProvider("web", [SearchResult(
                "web", "Sprint notes", "The latest sprint notes",
                "https://notes.example/sprint")]),
            StaticSearchProvider("wikipedia", []),
        ],
        mail=MockMailSender(),
        calendar=MockCalendar(),
        contacts=MockContacts([Contact("Bob Stone", BOB, 1000)]),
    )
    controller = Controller(
        llm_factory=lambda config: ScriptedLlm(SCRIPT),
        registry_factory=lambda config: default_registry(connectors, Whitelist.of([BOB])),
        text_mode=True,
    )
    with tempfile.TemporaryDirectory() as store:
        session_id = controller.create_session(SessionConfig(store_dir=store))
        for text in TURNS:
            print(f"\nuser: {text}")
            result = controller.handle_user_turn(session_id, text=text)
            for step in result.steps_taken[:-1]:
                print(f"  [{step.action.kind}] -> {step.observation.content.splitlines()[0]}")
            print(f"agent: {result.agent_message}")

        print("\n--- transcript ---")
        view, _ = controller.get_transcript(session_id)
        for utterance in view:
            print(f"{utterance.timestamp_ms:>7}ms  {utterance.speaker}: {utterance.text}")

        path = controller.close_session(session_id)
        doc = json.load(open(path))
        print(f"\nsession persisted to {path}")
        print(f"steps: {[s['action']['kind'] for s in doc['steps']]}")
        print(f"emails actually sent: {len(connectors.mail.sent)}")


if __name__ == "__main__":
    main()
