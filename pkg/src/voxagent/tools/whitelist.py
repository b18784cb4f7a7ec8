"""Recipient whitelist: the only addresses the email tool may send to.

Membership is case-insensitive exact match on the full address. An empty
whitelist blocks every send.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable

from ..config import is_valid_email
from ..errors import InvalidConfigError


@dataclass(frozen=True)
class Whitelist:
    allowed: frozenset[str]  # lowercased addresses

    @classmethod
    def of(cls, addresses: Iterable[str]) -> "Whitelist":
        normalized = set()
        for addr in addresses:
            addr = addr.strip()
            if not addr:
                continue
            if not is_valid_email(addr):
                raise InvalidConfigError("whitelist", f"not a valid email address: {addr!r}")
            normalized.add(addr.lower())
        return cls(frozenset(normalized))

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "Whitelist":
        """One address per line; blank lines and '#' comments are skipped."""
        entries = []
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if line:
                entries.append(line)
        return cls.of(entries)

    @classmethod
    def from_file(cls, path: str) -> "Whitelist":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_lines(fh)

    def __contains__(self, address: str) -> bool:
        return address.strip().lower() in self.allowed

    def __len__(self) -> int:
        return len(self.allowed)


class WatchedWhitelist:
    """Whitelist backed by a file, re-read whenever the file's mtime changes."""

    def __init__(self, path: str, extra: Iterable[str] = ()):
        self._path = path
        self._extra = tuple(extra)
        self._mtime: float | None = None
        self._cached = Whitelist.of(self._extra)
        self.current()

    def current(self) -> Whitelist:
        if not self._path:
            return self._cached
        try:
            mtime = os.stat(self._path).st_mtime
        except OSError:
            return self._cached
        if mtime != self._mtime:
            file_list = Whitelist.from_file(self._path)
            self._cached = Whitelist(file_list.allowed | Whitelist.of(self._extra).allowed)
            self._mtime = mtime
        return self._cached
