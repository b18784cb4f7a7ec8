"""Action executors, connectors, registry, and the recipient whitelist."""

from .actions import (
    CalendarEventOp,
    EmailDraft,
    chat_acknowledgement,
    contacts_observation,
    exec_calendar,
    exec_contacts,
    exec_email,
    exec_web_search,
    format_search_results,
    web_search_observation,
    TOP_K_PER_SOURCE,
)
from .connectors import (
    Connectors,
    Contact,
    HttpCalendarConnector,
    HttpContactsConnector,
    HttpMailSender,
    HttpSearchProvider,
    MockCalendar,
    MockContacts,
    MockMailSender,
    SearchResult,
    StaticSearchProvider,
    FailingSearchProvider,
    TokenStore,
    connectors_from_config,
    mock_connectors,
)
from .registry import (
    DispatchContext,
    RegisteredTool,
    ToolRegistry,
    builtin_specs,
    default_registry,
    dispatch,
)
from .whitelist import WatchedWhitelist, Whitelist

__all__ = [
    "CalendarEventOp",
    "Connectors",
    "Contact",
    "DispatchContext",
    "EmailDraft",
    "FailingSearchProvider",
    "HttpCalendarConnector",
    "HttpContactsConnector",
    "HttpMailSender",
    "HttpSearchProvider",
    "MockCalendar",
    "MockContacts",
    "MockMailSender",
    "RegisteredTool",
    "SearchResult",
    "StaticSearchProvider",
    "TOP_K_PER_SOURCE",
    "TokenStore",
    "ToolRegistry",
    "WatchedWhitelist",
    "Whitelist",
    "builtin_specs",
    "chat_acknowledgement",
    "connectors_from_config",
    "contacts_observation",
    "default_registry",
    "dispatch",
    "exec_calendar",
    "exec_contacts",
    "exec_email",
    "exec_web_search",
    "format_search_results",
    "mock_connectors",
    "web_search_observation",
]
