"""Open-ended QA scored 1-5 by a judge model with a fixed rubric.

The agent answers each instruction in a fresh single-turn session; the
judge sees the rubric, the instruction, and the answer, and must reply
with an integer. An unparseable judge reply gets one retry; after that
the item is excluded (and listed) rather than guessed at.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Sequence

from ..config import SessionConfig
from ..errors import CorpusParseError
from ..llm import LlmClient, LlmRequest
from ..tools import Connectors
from .mcq import _eval_controller
from .report import EvalReport

_SCORE_RE = re.compile(r"\b([1-5])\b")
_RETRY_NOTE = "Reply with a single integer from 1 to 5 and nothing else."


@dataclass(frozen=True)
class OpenItem:
    id: str
    instruction: str

    def __post_init__(self):
        if not self.instruction.strip():
            raise ValueError(f"item {self.id}: empty instruction")


def load_open_dataset(path: str) -> list[OpenItem]:
    """JSONL, one item per line: {id, instruction}."""
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                items.append(OpenItem(id=str(doc["id"]), instruction=str(doc["instruction"])))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusParseError(line_no, str(exc)) from exc
    return items


def load_judge_rubric() -> str:
    return resources.files("voxagent.data").joinpath("judge_rubric.txt").read_text("utf-8")


def parse_judge_score(text: str) -> int | None:
    match = _SCORE_RE.search(text)
    return int(match.group(1)) if match else None


def judge_answer(instruction: str, answer: str, judge: LlmClient) -> int | None:
    """One scoring round trip with a single corrective retry."""
    prompt = load_judge_rubric().format(instruction=instruction, answer=answer)
    messages = [{"role": "user", "content": prompt}]
    for attempt in range(2):
        response = judge.complete(LlmRequest(messages=tuple(messages), temperature=0.0))
        score = parse_judge_score(response.text)
        if score is not None:
            return score
        messages.append({"role": "assistant", "content": response.text})
        messages.append({"role": "user", "content": _RETRY_NOTE})
    return None


def run_judge_eval(
    dataset: Sequence[OpenItem],
    agent_llm: LlmClient,
    judge: LlmClient,
    *,
    config: SessionConfig | None = None,
    connectors: Connectors | None = None,
) -> EvalReport:
    if not dataset:
        raise ValueError("dataset must be non-empty")
    controller = _eval_controller(agent_llm, connectors)
    base = config or SessionConfig()

    per_item = []
    excluded: list[str] = []
    scores: list[int] = []
    for item in dataset:
        session_id = controller.create_session(base)
        result = controller.handle_user_turn(session_id, text=item.instruction)
        score = judge_answer(item.instruction, result.agent_message, judge)
        if score is None:
            excluded.append(item.id)
        else:
            scores.append(score)
        per_item.append({
            "id": item.id,
            "raw_response": result.agent_message,
            "score": score,
        })
    if not scores:
        raise ValueError("judge produced no usable scores")
    return EvalReport(
        n_items=len(dataset),
        metric="mean_judge_score",
        value=sum(scores) / len(scores),
        per_item=per_item,
        excluded=excluded,
    )
