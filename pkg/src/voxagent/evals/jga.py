"""Joint Goal Accuracy over a JSONL dialogue corpus.

For every turn of every dialogue: classify the domain from the cumulative
conversation, extract that domain's slots, merge into the running
(cumulative) predicted state, and compare against the turn's gold state.
JGA is the exact-match fraction over all turns; a per-domain breakdown is
included (a turn counts toward each domain present in gold or prediction,
matching on that domain's slots alone).
"""

from __future__ import annotations

from collections import defaultdict
from typing import Sequence

from ..dst import (
    NO_DOMAIN,
    TurnAnnotation,
    classify_domain,
    compute_jga,
    extract_dialog_state,
    load_domain_labels,
    load_jga_corpus,
    normalize_dialog_state,
    update_dialog_state,
)
from ..llm import LlmClient
from ..state import Utterance
from .report import EvalReport


def run_jga_eval(
    corpus_path: str,
    llm: LlmClient,
    *,
    labels: Sequence[str] | None = None,
) -> EvalReport:
    dialogues = load_jga_corpus(corpus_path)
    if not dialogues:
        raise ValueError("corpus is empty")
    label_set = list(labels) if labels is not None else load_domain_labels()

    annotations: list[TurnAnnotation] = []
    per_item = []
    domain_hits: dict[str, list[bool]] = defaultdict(list)

    for dialogue in dialogues:
        predicted: dict[str, dict[str, str]] = {}
        conversation: list[Utterance] = []
        for turn in dialogue.turns:
            conversation.extend(turn.utterances)
            domain = classify_domain(conversation, label_set, llm)
            if domain != NO_DOMAIN:
                extracted = extract_dialog_state(conversation, domain, llm)
                predicted = update_dialog_state(predicted, extracted)
            annotation = TurnAnnotation(
                turn_index=turn.turn_index,
                gold_state=turn.gold_state,
                predicted_state=predicted,
            )
            annotations.append(annotation)

            gold_n = normalize_dialog_state(turn.gold_state)
            pred_n = normalize_dialog_state(predicted)
            match = gold_n == pred_n
            for d in sorted(set(gold_n) | set(pred_n)):
                domain_hits[d].append(gold_n.get(d, {}) == pred_n.get(d, {}))
            per_item.append({
                "id": f"{dialogue.dialogue_id}:{turn.turn_index}",
                "domain": domain,
                "predicted": pred_n,
                "gold": gold_n,
                "match": match,
            })

    return EvalReport(
        n_items=len(annotations),
        metric="jga",
        value=compute_jga(annotations),
        per_item=per_item,
        breakdown={d: sum(hits) / len(hits) for d, hits in sorted(domain_hits.items())},
    )
