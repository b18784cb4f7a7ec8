"""The built-in action executors: web search, email, calendar, contacts, chat.

Executors turn a validated payload plus a connector into an Observation.
Failures the agent should see (rejected recipients, missing events, dead
providers) come back as error observations, not exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Sequence

from ..config import is_valid_email
from ..errors import AllProvidersFailedError, EventNotFoundError
from ..state import OUTCOME_ERROR, OUTCOME_OK, SOURCE_SYSTEM, SOURCE_TOOL, Observation
from .connectors import CalendarConnector, Contact, ContactsConnector, MailSender, SearchResult
from .whitelist import Whitelist

TOP_K_PER_SOURCE = 3
DEFAULT_CONTACT_LIMIT = 10


@dataclass(frozen=True)
class EmailDraft:
    to: tuple[str, ...]
    subject: str
    body: str

    def __post_init__(self):
        if not self.to:
            raise ValueError("email draft needs at least one recipient")
        for addr in self.to:
            if not is_valid_email(addr):
                raise ValueError(f"not a valid email address: {addr!r}")


@dataclass(frozen=True)
class CalendarEventOp:
    op: str                       # "book" | "edit"
    event_id: str | None = None   # required iff op == "edit"
    title: str | None = None
    start: str | None = None      # ISO-8601
    end: str | None = None
    attendees: tuple[str, ...] = ()

    def __post_init__(self):
        if self.op not in ("book", "edit"):
            raise ValueError(f"calendar op must be 'book' or 'edit', got {self.op!r}")
        if self.op == "edit" and not self.event_id:
            raise ValueError("edit requires an event_id")
        if self.op == "book":
            for required in ("title", "start", "end"):
                if not getattr(self, required):
                    raise ValueError(f"book requires {required}")
        if self.start and self.end:
            if _parse_ts(self.start) >= _parse_ts(self.end):
                raise ValueError("event start must be before end")


def _parse_ts(value: str) -> datetime:
    try:
        return datetime.fromisoformat(value)
    except ValueError as exc:
        raise ValueError(f"not an ISO-8601 timestamp: {value!r}") from exc


# --- web search -------------------------------------------------------------------


def exec_web_search(query: str, providers: Sequence[Any]) -> list[SearchResult]:
    """Query all providers; at most TOP_K_PER_SOURCE hits per provider, in
    provider order (web first by convention). Raises AllProvidersFailedError
    only when every provider errors out."""
    results, errors = _gather_search(query, providers)
    if not results and len(errors) == len(list(providers)):
        raise AllProvidersFailedError("; ".join(errors))
    return results


def _gather_search(query: str, providers: Sequence[Any]) -> tuple[list[SearchResult], list[str]]:
    if not query.strip():
        raise ValueError("search query must be non-empty")
    results: list[SearchResult] = []
    errors: list[str] = []
    for provider in providers:
        try:
            hits = provider.search(query)
        except Exception as exc:  # one dead source must not sink the other
            errors.append(f"{provider.source} search failed: {exc}")
            continue
        results.extend(hits[:TOP_K_PER_SOURCE])
    return results, errors


def format_search_results(results: Sequence[SearchResult]) -> str:
    lines = [
        f"{i}. [{r.source}] {r.title} — {r.snippet} ({r.url})"
        for i, r in enumerate(results, start=1)
    ]
    return "\n".join(lines)


def web_search_observation(query: str, providers: Sequence[Any]) -> Observation:
    results, errors = _gather_search(query, providers)
    if not results and errors and len(errors) == len(list(providers)):
        return Observation(SOURCE_TOOL, OUTCOME_ERROR,
                           "all search providers failed: " + "; ".join(errors))
    content = format_search_results(results) if results else "no results"
    if errors:
        content += "\n" + "\n".join(f"note: {e}" for e in errors)
    return Observation(
        SOURCE_TOOL, OUTCOME_OK, content,
        structured=[{"source": r.source, "title": r.title, "snippet": r.snippet, "url": r.url}
                    for r in results],
    )


# --- email ------------------------------------------------------------------------


def exec_email(draft: EmailDraft, whitelist: Whitelist, sender: MailSender) -> Observation:
    """All-or-nothing send: if any recipient is off the whitelist, nothing is
    sent and the rejected addresses are named."""
    rejected = [addr for addr in draft.to if addr not in whitelist]
    if rejected:
        return Observation(
            SOURCE_TOOL, OUTCOME_ERROR,
            "email blocked: recipients not on the whitelist: " + ", ".join(sorted(rejected)),
        )
    try:
        message_id = sender.send(list(draft.to), draft.subject, draft.body)
    except Exception as exc:
        return Observation(SOURCE_TOOL, OUTCOME_ERROR, f"email delivery failed: {exc}")
    return Observation(
        SOURCE_TOOL, OUTCOME_OK,
        f"email sent to {', '.join(draft.to)} (message id {message_id})",
        structured={"message_id": message_id},
    )


# --- calendar -----------------------------------------------------------------------


def exec_calendar(op: CalendarEventOp, connector: CalendarConnector) -> Observation:
    try:
        if op.op == "book":
            event = connector.book(op.title, op.start, op.end, list(op.attendees))
            return Observation(
                SOURCE_TOOL, OUTCOME_OK,
                f"booked event {event['id']}: {event['title']} from {event['start']} to {event['end']}",
                structured=event,
            )
        fields = {
            k: v for k, v in
            (("title", op.title), ("start", op.start), ("end", op.end))
            if v is not None
        }
        if op.attendees:
            fields["attendees"] = list(op.attendees)
        event = connector.edit(op.event_id, fields)
        return Observation(
            SOURCE_TOOL, OUTCOME_OK,
            f"updated event {event['id']}: {event['title']} from {event['start']} to {event['end']}",
            structured=event,
        )
    except EventNotFoundError as exc:
        return Observation(SOURCE_TOOL, OUTCOME_ERROR, f"event not found: {exc.event_id}")


# --- contacts -----------------------------------------------------------------------


def exec_contacts(query: str | None, connector: ContactsConnector,
                  limit: int = DEFAULT_CONTACT_LIMIT) -> list[Contact]:
    """Most recently contacted first; optional case-insensitive substring
    filter over name and email."""
    contacts = sorted(connector.list_contacts(), key=lambda c: c.last_contacted, reverse=True)
    if query and query.strip():
        needle = query.strip().lower()
        contacts = [c for c in contacts if needle in c.name.lower() or needle in c.email.lower()]
    return contacts[:limit]


def contacts_observation(query: str | None, connector: ContactsConnector,
                         limit: int = DEFAULT_CONTACT_LIMIT) -> Observation:
    contacts = exec_contacts(query, connector, limit)
    if not contacts:
        return Observation(SOURCE_TOOL, OUTCOME_OK, "no matching contacts")
    lines = [f"{i}. {c.name} <{c.email}>" for i, c in enumerate(contacts, start=1)]
    return Observation(
        SOURCE_TOOL, OUTCOME_OK, "\n".join(lines),
        structured=[{"name": c.name, "email": c.email, "last_contacted": c.last_contacted}
                    for c in contacts],
    )


# --- chat ---------------------------------------------------------------------------


def chat_acknowledgement(message: str) -> Observation:
    """Immediate observation for a dispatched chat action.

    The real observation (the user's reply) is recorded by the controller
    when it arrives; until then the chat stays pending on the session.
    """
    if not message.strip():
        raise ValueError("chat message must be non-empty")
    return Observation(SOURCE_SYSTEM, OUTCOME_OK, "message delivered; awaiting user reply")
