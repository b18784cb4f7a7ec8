"""Prompt-based dialog state tracking and Joint Goal Accuracy scoring.

The tracked state is a two-level map: domain -> slot -> value. Each turn,
the conversation is first classified into a domain, then the slots for
that domain are extracted as JSON and merged into the running state with
latest-wins semantics. The literal value "none" deletes a slot.

All comparisons normalize surface form (lowercase, trim, collapse internal
whitespace) so JGA scores are reproducible bit for bit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Any, Sequence

from .agent import strip_code_fence
from .errors import CorpusParseError
from .llm import LlmClient, LlmRequest
from .state import Utterance

DialogState = dict[str, dict[str, str]]

DELETE_SENTINEL = "none"
NO_DOMAIN = "none"

_WS_RE = re.compile(r"\s+")

_CLASSIFY_TEMPLATE = """Classify the conversation below into exactly one domain.
Valid domains: {labels}
If none of them fits, reply with: none

Conversation:
{conversation}

Reply with exactly one domain label and nothing else."""

_EXTRACT_TEMPLATE = """Read the conversation below and extract the information the user has \
established for the "{domain}" domain.

Conversation:
{conversation}

Reply with only a JSON object mapping slot names to string values for the \
"{domain}" domain, for example {{"area": "north", "stars": "4"}}. Use the value \
"none" for a slot the user explicitly cancelled. Reply with {{}} if nothing \
was established."""

_RETRY_CLASSIFY = "That was not a valid label. Reply with exactly one of: {labels}"
_RETRY_EXTRACT = "That was not valid JSON. Reply with only a single JSON object, no prose."


def _norm_text(value: str) -> str:
    return _WS_RE.sub(" ", value.strip().lower())


def normalize_dialog_state(state: dict[str, dict[str, Any]]) -> DialogState:
    """Canonical form used for merging and scoring.

    Lowercases and trims domains, slots and values; collapses internal
    whitespace; drops empty values, "none" values (the deletion sentinel
    never survives a merge) and domains left without slots.
    """
    out: DialogState = {}
    for domain, slots in state.items():
        clean: dict[str, str] = {}
        for slot, value in slots.items():
            v = _norm_text(str(value))
            if not v or v == DELETE_SENTINEL:
                continue
            clean[_norm_text(str(slot))] = v
        if clean:
            out[_norm_text(str(domain))] = clean
    return out


def render_conversation(conversation: Sequence[Utterance]) -> str:
    return "\n".join(f"{u.speaker}: {u.text}" for u in conversation)


def classify_domain(
    conversation: Sequence[Utterance],
    labels: Sequence[str],
    llm: LlmClient,
) -> str:
    """Map the conversation to one of ``labels`` or "none".

    The model reply is matched case-insensitively after trimming whitespace,
    quotes and trailing punctuation. An unmappable reply gets one retry with
    a corrective instruction; after that the result is "none".
    """
    if not conversation:
        raise ValueError("conversation must be non-empty")
    label_set = {label.strip().lower() for label in labels} | {NO_DOMAIN}
    prompt = _CLASSIFY_TEMPLATE.format(
        labels=", ".join(sorted(label_set - {NO_DOMAIN})),
        conversation=render_conversation(conversation),
    )
    messages: list[dict[str, str]] = [{"role": "user", "content": prompt}]
    for attempt in range(2):
        response = llm.complete(LlmRequest(messages=tuple(messages), temperature=0.0))
        candidate = response.text.strip().strip("`\"'").rstrip(".,!;:").strip().lower()
        if candidate in label_set:
            return candidate
        messages.append({"role": "assistant", "content": response.text})
        messages.append({"role": "user", "content": _RETRY_CLASSIFY.format(
            labels=", ".join(sorted(label_set)))})
    return NO_DOMAIN


def extract_dialog_state(
    conversation: Sequence[Utterance],
    domain: str,
    llm: LlmClient,
) -> DialogState:
    """Ask the model for the domain's slot values as JSON.

    Tolerates Markdown code fences. One corrective retry on unparseable
    output, then an empty extraction. Slot names and values are normalized;
    empty values are dropped, "none" values are kept so the merge can delete.
    """
    if domain == NO_DOMAIN:
        raise ValueError("cannot extract slots without a domain")
    prompt = _EXTRACT_TEMPLATE.format(
        domain=domain, conversation=render_conversation(conversation))
    messages: list[dict[str, str]] = [{"role": "user", "content": prompt}]
    for attempt in range(2):
        response = llm.complete(LlmRequest(messages=tuple(messages), temperature=0.0))
        parsed = _parse_slot_json(response.text)
        if parsed is not None:
            return {_norm_text(domain): parsed}
        messages.append({"role": "assistant", "content": response.text})
        messages.append({"role": "user", "content": _RETRY_EXTRACT})
    return {_norm_text(domain): {}}


def _parse_slot_json(text: str) -> dict[str, str] | None:
    try:
        doc = json.loads(strip_code_fence(text))
    except json.JSONDecodeError:
        return None
    if not isinstance(doc, dict):
        return None
    slots: dict[str, str] = {}
    for slot, value in doc.items():
        if not isinstance(value, (str, int, float, bool)):
            continue  # nested structures are not slot values
        if isinstance(value, bool):
            value = "true" if value else "false"
        v = _norm_text(str(value))
        if not v:
            continue
        slots[_norm_text(str(slot))] = v
    return slots


def update_dialog_state(prev: DialogState, extracted: DialogState) -> DialogState:
    """Latest-wins merge of an extraction into the running state.

    Extracted values overwrite previous ones; slots absent from the
    extraction persist; the sentinel value "none" removes a slot. Domains
    left without slots are dropped.
    """
    merged: dict[str, dict[str, str]] = {
        domain: dict(slots) for domain, slots in normalize_dialog_state(prev).items()
    }
    for domain, slots in extracted.items():
        domain = _norm_text(domain)
        target = merged.setdefault(domain, {})
        for slot, value in slots.items():
            slot = _norm_text(str(slot))
            value = _norm_text(str(value))
            if not slot or not value:
                continue
            if value == DELETE_SENTINEL:
                target.pop(slot, None)
            else:
                target[slot] = value
        if not target:
            merged.pop(domain, None)
    return merged


@dataclass(frozen=True)
class TurnAnnotation:
    turn_index: int
    gold_state: DialogState
    predicted_state: DialogState


def compute_jga(turns: Sequence[TurnAnnotation]) -> float:
    """Fraction of turns whose predicted state exactly matches gold.

    Exact means map equality over all domains, slots and values after
    normalization; slot and domain order never matter.
    """
    if not turns:
        raise ValueError("turns must be non-empty")
    matches = sum(
        1 for t in turns
        if normalize_dialog_state(t.predicted_state) == normalize_dialog_state(t.gold_state)
    )
    return matches / len(turns)


# --- corpus loading -------------------------------------------------------------


@dataclass(frozen=True)
class CorpusTurn:
    turn_index: int
    utterances: tuple[Utterance, ...]
    gold_state: DialogState


@dataclass(frozen=True)
class Dialogue:
    dialogue_id: str
    turns: tuple[CorpusTurn, ...]


def load_jga_corpus(path: str) -> list[Dialogue]:
    """Parse the JSONL corpus: one dialogue per line.

    Line shape: {"dialogue_id", "turns": [{"turn_index",
    "utterances": [{"speaker", "text"}], "gold_state"}]}.
    """
    dialogues: list[Dialogue] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                turns = tuple(
                    CorpusTurn(
                        turn_index=int(turn["turn_index"]),
                        utterances=tuple(
                            Utterance(u["speaker"], u["text"], timestamp_ms=0)
                            for u in turn["utterances"]
                        ),
                        gold_state={
                            str(d): {str(k): str(v) for k, v in slots.items()}
                            for d, slots in turn["gold_state"].items()
                        },
                    )
                    for turn in doc["turns"]
                )
                dialogues.append(Dialogue(dialogue_id=str(doc["dialogue_id"]), turns=turns))
            except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as exc:
                raise CorpusParseError(line_no, str(exc)) from exc
    return dialogues


def load_domain_labels(path: str = "") -> list[str]:
    """Label set for classification; empty path loads the packaged default."""
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(
            resources.files("voxagent.data").joinpath("domains.json").read_text("utf-8"))
    return [str(label).strip().lower() for label in doc["labels"]]


_UNSET_GOLD_VALUES = {"", "not mentioned", "none"}


def convert_woz_dialogues(doc: dict[str, Any]) -> list[Dialogue]:
    """Convert a MultiWOZ/SpokenWOZ-style data.json document to Dialogue values.

    Expected native layout: {dialogue_id: {"log": [turn, ...]}} where the log
    alternates user/system turns, each with "text", and system turns carry the
    belief state in "metadata": {domain: {"book": {...}, "semi": {slot: value}}}.
    One corpus turn is built per user/system pair; slot values equal to "",
    "none" or "not mentioned" are unset; the "booked" bookkeeping list is
    skipped.
    """
    dialogues = []
    for dialogue_id, payload in doc.items():
        log = payload.get("log", [])
        turns = []
        for turn_index, i in enumerate(range(0, len(log) - 1, 2)):
            user, system = log[i], log[i + 1]
            gold: dict[str, dict[str, str]] = {}
            for domain, groups in (system.get("metadata") or {}).items():
                slots: dict[str, str] = {}
                for group_name in ("semi", "book"):
                    for slot, value in (groups.get(group_name) or {}).items():
                        if slot == "booked" or not isinstance(value, str):
                            continue
                        value = value.strip().lower()
                        if value not in _UNSET_GOLD_VALUES:
                            slots[slot.strip().lower()] = value
                if slots:
                    gold[str(domain).strip().lower()] = slots
            turns.append(CorpusTurn(
                turn_index=turn_index,
                utterances=(
                    Utterance("user", str(user.get("text", "")), 0),
                    Utterance("agent", str(system.get("text", "")), 0),
                ),
                gold_state=gold,
            ))
        dialogues.append(Dialogue(dialogue_id=str(dialogue_id), turns=tuple(turns)))
    return dialogues


def convert_woz_file(src_path: str, out_path: str) -> int:
    """data.json (native WOZ layout) -> our JSONL corpus; returns dialogue count."""
    with open(src_path, "r", encoding="utf-8") as fh:
        dialogues = convert_woz_dialogues(json.load(fh))
    with open(out_path, "w", encoding="utf-8") as fh:
        for dialogue in dialogues:
            fh.write(json.dumps({
                "dialogue_id": dialogue.dialogue_id,
                "turns": [
                    {
                        "turn_index": turn.turn_index,
                        "utterances": [
                            {"speaker": u.speaker, "text": u.text} for u in turn.utterances
                        ],
                        "gold_state": turn.gold_state,
                    }
                    for turn in dialogue.turns
                ],
            }, ensure_ascii=False) + "\n")
    return len(dialogues)
