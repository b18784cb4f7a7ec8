"""Connector interfaces behind the tools, with mock and HTTP implementations.

Every external capability (search providers, mail, calendar, contacts) is a
small interface with two implementations: a deterministic in-memory mock so
the whole system runs offline, and a thin client for a generic REST shape.
Credentials are referenced by name (env var or token-store key) and are only
ever attached to requests going to that connector's own endpoint.
"""

from __future__ import annotations

import itertools
import json
import os
import stat
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

import requests

from ..errors import EventNotFoundError


@dataclass(frozen=True)
class SearchResult:
    source: str          # "web" | "wikipedia"
    title: str
    snippet: str
    url: str

    def __post_init__(self):
        if not self.snippet.strip():
            raise ValueError("snippet must be non-empty")
        if not self.url.startswith(("http://", "https://")):
            raise ValueError(f"url must be absolute: {self.url!r}")


@dataclass(frozen=True)
class Contact:
    name: str
    email: str
    last_contacted: int  # epoch seconds


class SearchProvider(Protocol):
    source: str

    def search(self, query: str) -> list[SearchResult]: ...


class MailSender(Protocol):
    def send(self, to: list[str], subject: str, body: str) -> str:
        """Deliver; returns a message id."""
        ...


class CalendarConnector(Protocol):
    def book(self, title: str, start: str, end: str, attendees: list[str]) -> dict[str, Any]: ...

    def edit(self, event_id: str, fields: dict[str, Any]) -> dict[str, Any]: ...

    def get(self, event_id: str) -> dict[str, Any]: ...


class ContactsConnector(Protocol):
    def list_contacts(self) -> list[Contact]: ...


# --- token storage ----------------------------------------------------------------


class TokenStore:
    """Provider tokens in a mode-restricted local JSON file (0600).

    Tokens never leave this host except inside requests to the provider
    that issued them; connectors look their own token up by key.
    """

    def __init__(self, path: str):
        self.path = path

    def get(self, key: str) -> str:
        try:
            with open(self.path, "r", encoding="utf-8") as fh:
                return str(json.load(fh).get(key, ""))
        except (OSError, json.JSONDecodeError):
            return ""

    def set(self, key: str, token: str) -> None:
        data = {}
        try:
            with open(self.path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError):
            pass
        data[key] = token
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
        os.chmod(self.path, stat.S_IRUSR | stat.S_IWUSR)


# --- mocks ------------------------------------------------------------------------


@dataclass
class StaticSearchProvider:
    """Returns the same hits for every query; hit count is the test knob."""

    source: str
    hits: list[SearchResult] = field(default_factory=list)

    def search(self, query: str) -> list[SearchResult]:
        return list(self.hits)


@dataclass
class FailingSearchProvider:
    source: str
    message: str = "provider unavailable"

    def search(self, query: str) -> list[SearchResult]:
        raise RuntimeError(self.message)


class MockMailSender:
    def __init__(self):
        self.sent: list[dict[str, Any]] = []

    def send(self, to: list[str], subject: str, body: str) -> str:
        message_id = f"msg-{len(self.sent) + 1}"
        self.sent.append({"id": message_id, "to": list(to), "subject": subject, "body": body})
        return message_id


class MockCalendar:
    def __init__(self):
        self._events: dict[str, dict[str, Any]] = {}
        self._ids = itertools.count(1)

    def book(self, title: str, start: str, end: str, attendees: list[str]) -> dict[str, Any]:
        event_id = f"evt-{next(self._ids)}"
        event = {"id": event_id, "title": title, "start": start, "end": end,
                 "attendees": list(attendees)}
        self._events[event_id] = event
        return dict(event)

    def edit(self, event_id: str, fields: dict[str, Any]) -> dict[str, Any]:
        if event_id not in self._events:
            raise EventNotFoundError(event_id)
        self._events[event_id].update(fields)
        return dict(self._events[event_id])

    def get(self, event_id: str) -> dict[str, Any]:
        if event_id not in self._events:
            raise EventNotFoundError(event_id)
        return dict(self._events[event_id])


@dataclass
class MockContacts:
    contacts: list[Contact] = field(default_factory=list)

    def list_contacts(self) -> list[Contact]:
        return list(self.contacts)


# --- HTTP implementations -----------------------------------------------------------

HttpFn = Callable[..., requests.Response]


def _auth_headers(token: str) -> dict[str, str]:
    return {"Authorization": f"Bearer {token}"} if token else {}


@dataclass
class HttpSearchProvider:
    """GET {endpoint}?q=... expecting JSON {"results": [{title, snippet, url}]}."""

    source: str
    endpoint: str
    api_key_env: str = ""
    http: HttpFn = requests.request

    def search(self, query: str) -> list[SearchResult]:
        headers = _auth_headers(os.environ.get(self.api_key_env, "") if self.api_key_env else "")
        resp = self.http("GET", self.endpoint, params={"q": query}, headers=headers, timeout=15)
        resp.raise_for_status()
        return [
            SearchResult(source=self.source, title=r.get("title", ""),
                         snippet=r.get("snippet", ""), url=r.get("url", ""))
            for r in resp.json().get("results", [])
        ]


@dataclass
class HttpMailSender:
    """POST {endpoint}/send with {to, subject, body}; returns {"message_id"}."""

    endpoint: str
    token: str = ""
    http: HttpFn = requests.request

    def send(self, to: list[str], subject: str, body: str) -> str:
        resp = self.http(
            "POST", self.endpoint.rstrip("/") + "/send",
            json={"to": to, "subject": subject, "body": body},
            headers=_auth_headers(self.token), timeout=30,
        )
        resp.raise_for_status()
        return str(resp.json().get("message_id", ""))


@dataclass
class HttpCalendarConnector:
    """REST events resource: POST /events, PATCH /events/{id}, GET /events/{id}."""

    endpoint: str
    token: str = ""
    http: HttpFn = requests.request

    def _url(self, suffix: str = "") -> str:
        return self.endpoint.rstrip("/") + "/events" + suffix

    def book(self, title: str, start: str, end: str, attendees: list[str]) -> dict[str, Any]:
        resp = self.http("POST", self._url(),
                         json={"title": title, "start": start, "end": end, "attendees": attendees},
                         headers=_auth_headers(self.token), timeout=30)
        resp.raise_for_status()
        return resp.json()

    def edit(self, event_id: str, fields: dict[str, Any]) -> dict[str, Any]:
        resp = self.http("PATCH", self._url(f"/{event_id}"), json=fields,
                         headers=_auth_headers(self.token), timeout=30)
        if resp.status_code == 404:
            raise EventNotFoundError(event_id)
        resp.raise_for_status()
        return resp.json()

    def get(self, event_id: str) -> dict[str, Any]:
        resp = self.http("GET", self._url(f"/{event_id}"),
                         headers=_auth_headers(self.token), timeout=30)
        if resp.status_code == 404:
            raise EventNotFoundError(event_id)
        resp.raise_for_status()
        return resp.json()


@dataclass
class HttpContactsConnector:
    """GET {endpoint}/contacts expecting [{name, email, last_contacted}]."""

    endpoint: str
    token: str = ""
    http: HttpFn = requests.request

    def list_contacts(self) -> list[Contact]:
        resp = self.http("GET", self.endpoint.rstrip("/") + "/contacts",
                         headers=_auth_headers(self.token), timeout=30)
        resp.raise_for_status()
        return [
            Contact(name=c.get("name", ""), email=c.get("email", ""),
                    last_contacted=int(c.get("last_contacted", 0)))
            for c in resp.json()
        ]


# --- assembly -----------------------------------------------------------------------


@dataclass
class Connectors:
    """Everything the built-in tools talk to."""

    search_providers: list[Any] = field(default_factory=list)  # ordered, web first
    mail: Any = None
    calendar: Any = None
    contacts: Any = None


def mock_connectors() -> Connectors:
    return Connectors(
        search_providers=[StaticSearchProvider("web"), StaticSearchProvider("wikipedia")],
        mail=MockMailSender(),
        calendar=MockCalendar(),
        contacts=MockContacts(),
    )


def connectors_from_config(path: str, token_store: TokenStore,
                           http: HttpFn = requests.request) -> Connectors:
    """Build HTTP connectors from a JSON config file.

    Config shape:
      {"search": {"web": {"endpoint": ..., "api_key_env": ...}, "wikipedia": {...}},
       "mail": {"endpoint": ..., "token_key": ...},
       "calendar": {...}, "contacts": {...}}

    Credentials are env-var names or token-store keys, never literal secrets.
    """
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)

    def token_for(section: dict[str, Any]) -> str:
        if section.get("token_env"):
            return os.environ.get(section["token_env"], "")
        if section.get("token_key"):
            return token_store.get(section["token_key"])
        return ""

    providers = []
    for source in ("web", "wikipedia"):
        section = cfg.get("search", {}).get(source)
        if section:
            providers.append(HttpSearchProvider(
                source=source, endpoint=section["endpoint"],
                api_key_env=section.get("api_key_env", ""), http=http))
    out = Connectors(search_providers=providers)
    if "mail" in cfg:
        out.mail = HttpMailSender(endpoint=cfg["mail"]["endpoint"],
                                  token=token_for(cfg["mail"]), http=http)
    if "calendar" in cfg:
        out.calendar = HttpCalendarConnector(endpoint=cfg["calendar"]["endpoint"],
                                             token=token_for(cfg["calendar"]), http=http)
    if "contacts" in cfg:
        out.contacts = HttpContactsConnector(endpoint=cfg["contacts"]["endpoint"],
                                             token=token_for(cfg["contacts"]), http=http)
    return out
