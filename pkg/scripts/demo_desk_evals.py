#!/usr/bin/env python3
"""Run every evaluation harness at desk scale with scripted models.

Demonstrates the three metrics (accuracy, mean judge score, JGA) without a
live endpoint. The JGA run uses the checked-in two-dialogue fixture.

Usage: python scripts/demo_desk_evals.py
"""

from __future__ import annotations

import json
from pathlib import Path

from voxagent.agent import Decision, format_decision
from voxagent.dst import load_jga_corpus
from voxagent.evals import (
    OpenItem,
    load_mcq_dataset,
    run_jga_eval,
    run_judge_eval,
    run_mcq_eval,
)
from voxagent.llm import ScriptedLlm

FIXTURES = Path(__file__).parent.parent / "tests" / "data"


def chat(message: str) -> str:
    return format_decision(Decision("answering", "chat", {"message": message}))


def main() -> None:
    items = load_mcq_dataset(str(FIXTURES / "mcq_items.jsonl"))
    agent = ScriptedLlm([chat(f"The answer is {i.gold}.") for i in items])
    mcq = run_mcq_eval(items, agent)
    print(f"mcq accuracy: {mcq.value:.3f} over {mcq.n_items} items")

    open_items = [OpenItem(id="o1", instruction="Explain photosynthesis briefly.")]
    judged = run_judge_eval(
        open_items,
        ScriptedLlm([chat("Plants turn light into sugar.")]),
        ScriptedLlm(["4"]),
    )
    print(f"judge mean score: {judged.value:.2f} over {judged.n_items} items")

    corpus = str(FIXTURES / "jga_fixture.jsonl")
    script = []
    for dialogue in load_jga_corpus(corpus):
        for turn in dialogue.turns:
            (domain, slots), = turn.gold_state.items()
            script += [domain, json.dumps(slots)]
    jga = run_jga_eval(corpus, ScriptedLlm(script))
    print(f"jga (gold-echo): {jga.value:.3f} over {jga.n_items} turns")
    print(f"per-domain: {jga.breakdown}")


if __name__ == "__main__":
    main()
