"""Multiple-choice QA evaluation: run items through the agent, extract the
chosen label from its free-text answer, score against gold.

Each item is a fresh single-turn text-mode session, so the step log (and
therefore the web-search policy's effect) is observable per item.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from ..config import SessionConfig
from ..controller import Controller
from ..errors import CorpusParseError
from ..llm import LlmClient
from ..speech import decode_wav
from ..tools import Connectors, StaticSearchProvider, default_registry, mock_connectors
from .report import EvalReport

UNPARSED = "unparsed"


@dataclass(frozen=True)
class McqItem:
    id: str
    question: str
    choices: dict[str, str]   # label -> choice text
    gold: str
    wav_path: str = ""        # optional spoken form of the question

    def __post_init__(self):
        if len(self.choices) < 2:
            raise ValueError(f"item {self.id}: need at least 2 choices")
        if self.gold not in self.choices:
            raise ValueError(f"item {self.id}: gold label {self.gold!r} not among choices")


def load_mcq_dataset(path: str) -> list[McqItem]:
    """JSONL, one item per line: {id, question, choices: {label: text}, gold}."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                items.append(McqItem(
                    id=str(doc["id"]), question=str(doc["question"]),
                    choices={str(k): str(v) for k, v in doc["choices"].items()},
                    gold=str(doc["gold"]), wav_path=str(doc.get("wav_path", "")),
                ))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusParseError(line_no, str(exc)) from exc
    return items


def _collapse(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip().casefold())


def extract_mcq_answer(response: str, choices: Mapping[str, str]) -> str:
    """Deterministic extraction cascade; returns a label or "unparsed".

    1. A line consisting of nothing but a label ("B", "(B)", "B.").
    2. An explicit answer phrase ("the answer is B", "answer: B"), then the
       weaker "option B" / "choice B" forms.
    3. Exactly one choice's text appearing verbatim in the response.

    "unparsed" is scored as incorrect by the harness.
    """
    labels = list(choices)
    by_lower = {label.lower(): label for label in labels}
    alternatives = "|".join(re.escape(label) for label in labels)

    standalone = re.compile(rf"^\s*\(?({alternatives})\)?\s*[.)]?\s*$", re.IGNORECASE)
    for line in response.splitlines():
        match = standalone.match(line)
        if match:
            return by_lower[match.group(1).lower()]

    for pattern in (
        rf"answer\s*(?:is|:)\s*\(?({alternatives})\b",
        rf"(?:option|choice)\s*\(?({alternatives})\b",
    ):
        match = re.search(pattern, response, re.IGNORECASE)
        if match:
            return by_lower[match.group(1).lower()]

    haystack = _collapse(response)
    contained = [
        label for label, text in choices.items()
        if _collapse(text) and _collapse(text) in haystack
    ]
    if len(contained) == 1:
        return contained[0]
    return UNPARSED


def render_mcq_question(item: McqItem) -> str:
    lines = [item.question]
    for label in sorted(item.choices):
        lines.append(f"{label}. {item.choices[label]}")
    lines.append("Answer with the letter of the correct choice.")
    return "\n".join(lines)


def _eval_controller(llm: LlmClient, connectors: Connectors | None = None) -> Controller:
    # Default config keeps ASR/TTS off, so this is the text-mode desk path;
    # items carrying wav_path need a config with an ASR backend enabled.
    conn = connectors or _seeded_connectors()
    return Controller(
        llm_factory=lambda config: llm,
        registry_factory=lambda config: default_registry(conn, enabled=config.enabled_tools),
    )


def _seeded_connectors() -> Connectors:
    conn = mock_connectors()
    # Give the search tool something to return so a policy-driven search
    # produces a non-empty observation.
    conn.search_providers = [
        StaticSearchProvider("web", []),
        StaticSearchProvider("wikipedia", []),
    ]
    return conn


def run_mcq_eval(
    dataset: Sequence[McqItem],
    llm: LlmClient,
    *,
    web_search_policy: bool = False,
    config: SessionConfig | None = None,
    connectors: Connectors | None = None,
) -> EvalReport:
    """Accuracy over the dataset; items run in dataset order, one fresh
    session each. ``web_search_policy`` turns on the search-before-answer
    steering. Raw responses and the per-item action kinds are retained."""
    if not dataset:
        raise ValueError("dataset must be non-empty")
    base = config or SessionConfig()
    base = replace(base, policy=replace(
        base.policy, require_web_search_before_answer=web_search_policy))

    controller = _eval_controller(llm, connectors)
    per_item = []
    correct = 0
    for item in dataset:
        session_id = controller.create_session(base)
        if item.wav_path:
            with open(item.wav_path, "rb") as fh:
                clip = decode_wav(fh.read())
            result = controller.handle_user_turn(session_id, clip=clip)
        else:
            result = controller.handle_user_turn(session_id, text=render_mcq_question(item))
        extracted = extract_mcq_answer(result.agent_message, item.choices)
        is_correct = extracted == item.gold
        correct += is_correct
        per_item.append({
            "id": item.id,
            "raw_response": result.agent_message,
            "extracted": extracted,
            "correct": is_correct,
            "step_kinds": [s.action.kind for s in result.steps_taken],
        })
    return EvalReport(
        n_items=len(dataset),
        metric="accuracy",
        value=correct / len(dataset),
        per_item=per_item,
    )
